//! Plain-text experiment configuration: `key = value` lines grouped under
//! `[section]` headers, `#` comments. No nesting, no quoting; the format is
//! meant to diff cleanly next to the CSV outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use oversmooth::experiment::{GridSpec, Rule};
use oversmooth::rules::{DiscrepancyConfig, SmoothnessCase};

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub grid: GridSpec,
    pub output_dir: PathBuf,
    pub emit_plots: bool,
    pub figure: Option<FigureConfig>,
}

#[derive(Debug, Clone)]
pub struct FigureConfig {
    pub delta: f64,
    pub alphas: Vec<f64>,
    pub seed: u64,
}

type Sections = BTreeMap<String, BTreeMap<String, String>>;

fn parse_sections(text: &str) -> Result<Sections> {
    let mut sections: Sections = BTreeMap::new();
    let mut current = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| anyhow!("line {}: unterminated section header", lineno + 1))?;
            current = name.trim().to_string();
            sections.entry(current.clone()).or_default();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected `key = value`", lineno + 1))?;
        if current.is_empty() {
            bail!("line {}: key outside any [section]", lineno + 1);
        }
        sections
            .get_mut(&current)
            .expect("section was just inserted")
            .insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(sections)
}

struct Section<'a> {
    name: &'a str,
    entries: &'a BTreeMap<String, String>,
}

impl<'a> Section<'a> {
    fn get(&self, key: &str) -> Result<&str> {
        self.entries
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| anyhow!("[{}] is missing `{key}`", self.name))
    }

    fn get_or(&self, key: &str, default: &'a str) -> &str {
        self.entries.get(key).map(String::as_str).unwrap_or(default)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.get(key)?;
        raw.parse()
            .map_err(|_| anyhow!("[{}] {key} = {raw:?} does not parse", self.name))
    }

    fn parse_or<T: std::str::FromStr>(&self, key: &str, default: &'a str) -> Result<T> {
        let raw = self.get_or(key, default);
        raw.parse()
            .map_err(|_| anyhow!("[{}] {key} = {raw:?} does not parse", self.name))
    }

    fn parse_list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>> {
        self.get(key)?
            .split(',')
            .map(|item| {
                let item = item.trim();
                item.parse()
                    .map_err(|_| anyhow!("[{}] {key}: bad entry {item:?}", self.name))
            })
            .collect()
    }
}

pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let sections = parse_sections(&text)?;
    let known = ["problem", "noise", "rule", "output", "figure"];
    for name in sections.keys() {
        if !known.contains(&name.as_str()) {
            bail!("unknown section [{name}]");
        }
    }
    let section = |name: &'static str| -> Result<Section<'_>> {
        sections
            .get(name)
            .map(|entries| Section { name, entries })
            .ok_or_else(|| anyhow!("missing section [{name}]"))
    };

    let problem = section("problem")?;
    let p_true: f64 = problem.parse("p_true")?;
    let n: usize = problem.parse("n")?;
    let r: f64 = problem.parse_or("r", "1")?;
    let a: f64 = problem.parse_or("a", "1")?;

    let noise = section("noise")?;
    let deltas: Vec<f64> = noise.parse_list("deltas")?;
    let seeds: Vec<u64> = noise.parse_list("seeds")?;

    let rule_section = section("rule")?;
    let rule = match rule_section.get_or("kind", "discrepancy") {
        "discrepancy" => {
            let mut dcfg = DiscrepancyConfig::new(
                rule_section.parse_or("b", "2")?,
                rule_section.parse_or("theta", "2")?,
                rule_section.parse_or("alpha0", "1")?,
            )
            .map_err(|e| anyhow!("{e}"))?;
            dcfg.k_max = rule_section.parse_or("k_max", "60")?;
            Rule::Discrepancy(dcfg)
        }
        "apriori" => {
            let case = match rule_section.get_or("case", "hoelder") {
                "hoelder" => {
                    let p: f64 = match rule_section.entries.get("p") {
                        Some(raw) => raw
                            .parse()
                            .map_err(|_| anyhow!("[rule] p = {raw:?} does not parse"))?,
                        None => p_true,
                    };
                    SmoothnessCase::hoelder(p).map_err(|e| anyhow!("{e}"))?
                }
                "loworder" => SmoothnessCase::LowOrder,
                "noexplicit" => SmoothnessCase::NoExplicit {
                    alpha_exponent: rule_section.parse("s")?,
                },
                other => bail!("[rule] unknown case {other:?}"),
            };
            Rule::Apriori {
                case,
                c: rule_section.parse_or("c", "1")?,
            }
        }
        other => bail!("[rule] unknown kind {other:?}"),
    };

    let spec = GridSpec {
        p_true,
        n,
        r,
        a,
        deltas,
        seeds,
        rule,
    };
    spec.validate().map_err(|e| anyhow!("{e}"))?;
    spec.reg_config().map_err(|e| anyhow!("{e}"))?;
    spec.setup().map_err(|e| anyhow!("{e}"))?;

    let (output_dir, emit_plots) = match sections.get("output") {
        Some(entries) => {
            let output = Section {
                name: "output",
                entries,
            };
            let dir = PathBuf::from(output.get_or("dir", "out"));
            let emit: bool = output.parse_or("emit_plots", "false")?;
            (dir, emit)
        }
        None => (PathBuf::from("out"), false),
    };

    let figure = match sections.get("figure") {
        Some(entries) => {
            let fig = Section {
                name: "figure",
                entries,
            };
            let alphas: Vec<f64> = fig.parse_list("alphas")?;
            if alphas.is_empty() || alphas.windows(2).any(|w| w[0] <= w[1]) {
                bail!("[figure] alphas must be strictly descending");
            }
            Some(FigureConfig {
                delta: fig.parse("delta")?,
                alphas,
                seed: fig.parse_or("seed", "1")?,
            })
        }
        None => None,
    };

    Ok(ExperimentConfig {
        grid: spec,
        output_dir,
        emit_plots,
        figure,
    })
}
