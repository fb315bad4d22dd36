//! The six sample-design axes, named strategy presets, and the
//! single-option ablation grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where the task instruction sits relative to the task text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Placement {
    InstFirst,
    InstLast,
    NoInst,
}

/// Whether the input (prompt) portion contributes to the training loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputModeling {
    Mi,
    NoMi,
}

/// Output layout for multiple predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputFormat {
    Natural,
    Lines,
    Json,
}

/// Placeholder-for-unmentioned vs omit-unmentioned targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnmentionedHandling {
    Pu,
    Ou,
}

/// Textual vs numeric label tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelStyle {
    Txt,
    Num,
}

/// Reasoning field placement: none, before the prediction, or after it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reasoning {
    NoCot,
    Cot,
    RCot,
}

/// One point in the six-axis design space.
///
/// `lines_as_list` is a sub-flavor of the `Lines` format whose value side is
/// a bracketed list; it is a renderer flag, not a seventh axis, and does not
/// count toward axis Hamming distance.
///
/// Serializes as the compact string form (`inst_first/no_mi/lines/pu/txt/no_cot`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DesignStrategy {
    pub placement: Placement,
    pub input_modeling: InputModeling,
    pub output_format: OutputFormat,
    pub unmentioned: UnmentionedHandling,
    pub label_style: LabelStyle,
    pub reasoning: Reasoning,
    pub lines_as_list: bool,
}

impl Serialize for DesignStrategy {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.compact())
    }
}

impl<'de> Deserialize<'de> for DesignStrategy {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<DesignStrategy, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl DesignStrategy {
    pub fn new(
        placement: Placement,
        input_modeling: InputModeling,
        output_format: OutputFormat,
        unmentioned: UnmentionedHandling,
        label_style: LabelStyle,
        reasoning: Reasoning,
    ) -> DesignStrategy {
        DesignStrategy {
            placement,
            input_modeling,
            output_format,
            unmentioned,
            label_style,
            reasoning,
            lines_as_list: false,
        }
    }

    /// Number of the six axes on which two strategies differ.
    pub fn hamming(&self, other: &DesignStrategy) -> usize {
        (self.placement != other.placement) as usize
            + (self.input_modeling != other.input_modeling) as usize
            + (self.output_format != other.output_format) as usize
            + (self.unmentioned != other.unmentioned) as usize
            + (self.label_style != other.label_style) as usize
            + (self.reasoning != other.reasoning) as usize
    }

    /// Compact form accepted by every CLI flag, e.g.
    /// `inst_first/no_mi/lines/pu/txt/no_cot`.
    pub fn compact(&self) -> String {
        let format = if self.lines_as_list && self.output_format == OutputFormat::Lines {
            "lines_of_list"
        } else {
            match self.output_format {
                OutputFormat::Natural => "natural",
                OutputFormat::Lines => "lines",
                OutputFormat::Json => "json",
            }
        };
        format!(
            "{}/{}/{}/{}/{}/{}",
            match self.placement {
                Placement::InstFirst => "inst_first",
                Placement::InstLast => "inst_last",
                Placement::NoInst => "no_inst",
            },
            match self.input_modeling {
                InputModeling::Mi => "mi",
                InputModeling::NoMi => "no_mi",
            },
            format,
            match self.unmentioned {
                UnmentionedHandling::Pu => "pu",
                UnmentionedHandling::Ou => "ou",
            },
            match self.label_style {
                LabelStyle::Txt => "txt",
                LabelStyle::Num => "num",
            },
            match self.reasoning {
                Reasoning::NoCot => "no_cot",
                Reasoning::Cot => "cot",
                Reasoning::RCot => "r_cot",
            },
        )
    }

    /// Parse either a compact strategy string or a preset name.
    pub fn parse_spec(s: &str) -> Result<DesignStrategy> {
        if let Ok(strategy) = preset(s) {
            return Ok(strategy);
        }
        s.parse()
    }
}

impl std::fmt::Display for DesignStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.compact())
    }
}

impl std::str::FromStr for DesignStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<DesignStrategy> {
        let parts: Vec<&str> = s.split('/').collect();
        if parts.len() != 6 {
            return Err(Error::validation(format!(
                "strategy '{s}' must have 6 segments \
                 placement/modeling/format/unmentioned/labelstyle/reasoning"
            )));
        }
        let placement = match parts[0] {
            "inst_first" => Placement::InstFirst,
            "inst_last" => Placement::InstLast,
            "no_inst" => Placement::NoInst,
            other => {
                return Err(Error::validation(format!(
                    "unknown placement '{other}' (inst_first|inst_last|no_inst)"
                )))
            }
        };
        let input_modeling = match parts[1] {
            "mi" => InputModeling::Mi,
            "no_mi" => InputModeling::NoMi,
            other => {
                return Err(Error::validation(format!(
                    "unknown input modeling '{other}' (mi|no_mi)"
                )))
            }
        };
        let (output_format, lines_as_list) = match parts[2] {
            "natural" => (OutputFormat::Natural, false),
            "lines" => (OutputFormat::Lines, false),
            "lines_of_list" => (OutputFormat::Lines, true),
            "json" => (OutputFormat::Json, false),
            other => {
                return Err(Error::validation(format!(
                    "unknown output format '{other}' (natural|lines|lines_of_list|json)"
                )))
            }
        };
        let unmentioned = match parts[3] {
            "pu" => UnmentionedHandling::Pu,
            "ou" => UnmentionedHandling::Ou,
            other => {
                return Err(Error::validation(format!(
                    "unknown unmentioned handling '{other}' (pu|ou)"
                )))
            }
        };
        let label_style = match parts[4] {
            "txt" => LabelStyle::Txt,
            "num" => LabelStyle::Num,
            other => {
                return Err(Error::validation(format!(
                    "unknown label style '{other}' (txt|num)"
                )))
            }
        };
        let reasoning = match parts[5] {
            "no_cot" => Reasoning::NoCot,
            "cot" => Reasoning::Cot,
            "r_cot" => Reasoning::RCot,
            other => {
                return Err(Error::validation(format!(
                    "unknown reasoning '{other}' (no_cot|cot|r_cot)"
                )))
            }
        };
        Ok(DesignStrategy {
            placement,
            input_modeling,
            output_format,
            unmentioned,
            label_style,
            reasoning,
            lines_as_list,
        })
    }
}

/// Names of the built-in strategy presets.
pub const PRESET_NAMES: [&str; 3] = ["ES-SDE", "EW-SDE", "Heuristic"];

/// Look up a preset by name (case-insensitive; '-' and '_' are equivalent).
pub fn preset(name: &str) -> Result<DesignStrategy> {
    let key: String = name
        .chars()
        .filter(|c| *c != '-' && *c != '_')
        .collect::<String>()
        .to_ascii_lowercase();
    match key.as_str() {
        "essde" => Ok(DesignStrategy::new(
            Placement::InstFirst,
            InputModeling::NoMi,
            OutputFormat::Lines,
            UnmentionedHandling::Pu,
            LabelStyle::Txt,
            Reasoning::NoCot,
        )),
        "ewsde" => Ok(DesignStrategy::new(
            Placement::InstLast,
            InputModeling::NoMi,
            OutputFormat::Natural,
            UnmentionedHandling::Ou,
            LabelStyle::Txt,
            Reasoning::NoCot,
        )),
        "heuristic" => {
            let mut s = DesignStrategy::new(
                Placement::InstFirst,
                InputModeling::NoMi,
                OutputFormat::Lines,
                UnmentionedHandling::Ou,
                LabelStyle::Txt,
                Reasoning::NoCot,
            );
            s.lines_as_list = true;
            Ok(s)
        }
        _ => Err(Error::validation(format!(
            "unknown preset '{name}' (known presets: {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// Enumerate the full 3*2*3*2*2*3 = 216 strategy space.
pub fn enumerate_strategies() -> Vec<DesignStrategy> {
    let mut out = Vec::with_capacity(216);
    for placement in [Placement::InstFirst, Placement::InstLast, Placement::NoInst] {
        for input_modeling in [InputModeling::Mi, InputModeling::NoMi] {
            for output_format in [OutputFormat::Natural, OutputFormat::Lines, OutputFormat::Json] {
                for unmentioned in [UnmentionedHandling::Pu, UnmentionedHandling::Ou] {
                    for label_style in [LabelStyle::Txt, LabelStyle::Num] {
                        for reasoning in [Reasoning::NoCot, Reasoning::Cot, Reasoning::RCot] {
                            out.push(DesignStrategy::new(
                                placement,
                                input_modeling,
                                output_format,
                                unmentioned,
                                label_style,
                                reasoning,
                            ));
                        }
                    }
                }
            }
        }
    }
    out
}

/// What the corpus can support; reasoning designs need rationale text.
#[derive(Debug, Clone, Copy, Default)]
pub struct CorpusCapabilities {
    pub has_rationales: bool,
}

/// Flag strategy/corpus mismatches. Empty result means ok.
pub fn validate_strategy(strategy: &DesignStrategy, caps: CorpusCapabilities) -> Vec<String> {
    let mut violations = Vec::new();
    if strategy.reasoning != Reasoning::NoCot && !caps.has_rationales {
        violations.push("reasoning requires rationales".to_string());
    }
    violations
}

/// The three single-option ablation families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AblationGroup {
    Input,
    Output,
    Reasoning,
}

impl std::str::FromStr for AblationGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<AblationGroup> {
        match s.to_ascii_lowercase().as_str() {
            "input" => Ok(AblationGroup::Input),
            "output" => Ok(AblationGroup::Output),
            "reasoning" => Ok(AblationGroup::Reasoning),
            other => Err(Error::validation(format!(
                "unknown ablation group '{other}' (input|output|reasoning)"
            ))),
        }
    }
}

/// A group baseline plus its one-axis-edit variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationGrid {
    pub group: AblationGroup,
    pub baseline_label: String,
    pub baseline: DesignStrategy,
    pub variants: Vec<(String, DesignStrategy)>,
}

/// Build the single-option grid for one group. Every variant differs from
/// the baseline in exactly one axis; labels echo the reported row names.
pub fn ablation_grid(baseline: &DesignStrategy, group: AblationGroup) -> AblationGrid {
    let mut variants = Vec::new();
    match group {
        AblationGroup::Input => {
            let other_placement = match baseline.placement {
                Placement::InstFirst => Placement::InstLast,
                _ => Placement::InstFirst,
            };
            let mut v = *baseline;
            v.placement = other_placement;
            variants.push((format!("{}, _", placement_label(other_placement)), v));
            if baseline.placement != Placement::NoInst {
                let mut v = *baseline;
                v.placement = Placement::NoInst;
                variants.push(("No-inst, _".to_string(), v));
            }
            let mut v = *baseline;
            v.input_modeling = flip_modeling(baseline.input_modeling);
            variants.push((format!("_, {}", modeling_label(v.input_modeling)), v));
        }
        AblationGroup::Output => {
            for format in [OutputFormat::Natural, OutputFormat::Lines, OutputFormat::Json] {
                if format == baseline.output_format {
                    continue;
                }
                let mut v = *baseline;
                v.output_format = format;
                variants.push((format!("{}, _, _", format_label(format)), v));
            }
            let mut v = *baseline;
            v.label_style = flip_style(baseline.label_style);
            variants.push((format!("_, {}, _", style_label(v.label_style)), v));
            let mut v = *baseline;
            v.unmentioned = flip_unmentioned(baseline.unmentioned);
            variants.push((format!("_, _, {}", unmentioned_label(v.unmentioned)), v));
        }
        AblationGroup::Reasoning => {
            for reasoning in [Reasoning::NoCot, Reasoning::Cot, Reasoning::RCot] {
                if reasoning == baseline.reasoning {
                    continue;
                }
                let mut v = *baseline;
                v.reasoning = reasoning;
                variants.push((reasoning_label(reasoning).to_string(), v));
            }
        }
    }
    AblationGrid {
        group,
        baseline_label: baseline_label(baseline, group),
        baseline: *baseline,
        variants,
    }
}

fn baseline_label(s: &DesignStrategy, group: AblationGroup) -> String {
    match group {
        AblationGroup::Input => format!(
            "{}, {}",
            placement_label(s.placement),
            modeling_label(s.input_modeling)
        ),
        AblationGroup::Output => format!(
            "{}, {}, {}",
            format_label(s.output_format),
            style_label(s.label_style),
            unmentioned_label(s.unmentioned)
        ),
        AblationGroup::Reasoning => reasoning_label(s.reasoning).to_string(),
    }
}

fn placement_label(p: Placement) -> &'static str {
    match p {
        Placement::InstFirst => "Inst-first",
        Placement::InstLast => "Inst-last",
        Placement::NoInst => "No-inst",
    }
}

fn modeling_label(m: InputModeling) -> &'static str {
    match m {
        InputModeling::Mi => "MI",
        InputModeling::NoMi => "No-MI",
    }
}

fn format_label(f: OutputFormat) -> &'static str {
    match f {
        OutputFormat::Natural => "Natural",
        OutputFormat::Lines => "Lines",
        OutputFormat::Json => "JSON",
    }
}

fn style_label(s: LabelStyle) -> &'static str {
    match s {
        LabelStyle::Txt => "TxtLabel",
        LabelStyle::Num => "NumLabel",
    }
}

fn unmentioned_label(u: UnmentionedHandling) -> &'static str {
    match u {
        UnmentionedHandling::Pu => "PU",
        UnmentionedHandling::Ou => "OU",
    }
}

fn reasoning_label(r: Reasoning) -> &'static str {
    match r {
        Reasoning::NoCot => "No-CoT",
        Reasoning::Cot => "CoT",
        Reasoning::RCot => "R-CoT",
    }
}

fn flip_modeling(m: InputModeling) -> InputModeling {
    match m {
        InputModeling::Mi => InputModeling::NoMi,
        InputModeling::NoMi => InputModeling::Mi,
    }
}

fn flip_style(s: LabelStyle) -> LabelStyle {
    match s {
        LabelStyle::Txt => LabelStyle::Num,
        LabelStyle::Num => LabelStyle::Txt,
    }
}

fn flip_unmentioned(u: UnmentionedHandling) -> UnmentionedHandling {
    match u {
        UnmentionedHandling::Pu => UnmentionedHandling::Ou,
        UnmentionedHandling::Ou => UnmentionedHandling::Pu,
    }
}
