//! Sectioned `key = value` scenario configs with line-precise validation.
//! Unknown sections and keys are rejected; every numeric field must be
//! finite.

use lbmcf_core::catalog::{MetricExpr, PotentialExpr};
use lbmcf_core::density::CutoffKind;
use lbmcf_core::flow::{FlowParams, Scheme};
use lbmcf_core::smat::MAX_DIM;
use lbmcf_core::{BoundaryMode, Grid, GridConfig, MetricField, SMat, ScalarField};
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default)]
struct Section {
    /// key -> (line, value)
    entries: BTreeMap<String, (usize, String)>,
    line: usize,
}

fn parse_sections(text: &str) -> Result<BTreeMap<String, Section>, ConfigError> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(ConfigError {
                    line: lineno,
                    message: "unterminated section header".into(),
                });
            }
            let name = line[1..line.len() - 1].trim().to_string();
            if sections.contains_key(&name) {
                return Err(ConfigError {
                    line: lineno,
                    message: format!("duplicate section [{name}]"),
                });
            }
            sections.insert(
                name.clone(),
                Section {
                    entries: BTreeMap::new(),
                    line: lineno,
                },
            );
            current = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError {
                line: lineno,
                message: format!("expected `key = value`, got {line:?}"),
            });
        };
        let Some(sect) = &current else {
            return Err(ConfigError {
                line: lineno,
                message: "key outside any section".into(),
            });
        };
        let key = key.trim().to_string();
        let sec = sections.get_mut(sect).unwrap();
        if sec.entries.contains_key(&key) {
            return Err(ConfigError {
                line: lineno,
                message: format!("duplicate key {key:?}"),
            });
        }
        sec.entries.insert(key, (lineno, value.trim().to_string()));
    }
    Ok(sections)
}

struct SectionReader {
    name: String,
    entries: BTreeMap<String, (usize, String)>,
    line: usize,
}

impl SectionReader {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<(usize, String), ConfigError> {
        self.take(key).ok_or_else(|| ConfigError {
            line: self.line,
            message: format!("section [{}] missing required key {key:?}", self.name),
        })
    }

    fn f64_req(&mut self, key: &str) -> Result<f64, ConfigError> {
        let (line, v) = self.required(key)?;
        parse_f64(line, key, &v)
    }

    fn f64_opt(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.take(key) {
            Some((line, v)) => parse_f64(line, key, &v),
            None => Ok(default),
        }
    }

    fn usize_req(&mut self, key: &str) -> Result<usize, ConfigError> {
        let (line, v) = self.required(key)?;
        v.parse::<usize>().map_err(|e| ConfigError {
            line,
            message: format!("{key}: {e}"),
        })
    }

    fn usize_opt(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.take(key) {
            Some((line, v)) => v.parse::<usize>().map_err(|e| ConfigError {
                line,
                message: format!("{key}: {e}"),
            }),
            None => Ok(default),
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        if let Some((key, (line, _))) = self.entries.into_iter().next() {
            return Err(ConfigError {
                line,
                message: format!("unknown key {key:?} in section [{}]", self.name),
            });
        }
        Ok(())
    }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v.parse().map_err(|e| ConfigError {
        line,
        message: format!("{key}: {e}"),
    })?;
    if !x.is_finite() {
        return Err(ConfigError {
            line,
            message: format!("{key}: must be finite"),
        });
    }
    Ok(x)
}

fn parse_f64_list(line: usize, key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split_whitespace()
        .map(|tok| parse_f64(line, key, tok))
        .collect()
}

#[derive(Debug, Clone)]
pub enum ThetaHatMode {
    Average,
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct DensityBlock {
    pub x0: [f64; MAX_DIM],
    pub t_prime: f64,
    pub cutoff: CutoffKind,
}

#[derive(Debug, Clone)]
pub struct ShrinkerBlock {
    pub time_shift: f64,
}

#[derive(Debug, Clone)]
pub struct KnormBlock {
    pub alpha: f64,
    pub stride_x: usize,
    pub stride_t: usize,
}

#[derive(Debug, Clone)]
pub struct EnsembleBlock {
    pub count: usize,
    pub amp: f64,
    pub width: f64,
    pub taus: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub grid: GridConfig,
    pub metric: MetricExpr,
    pub initial: PotentialExpr,
    pub theta_hat: ThetaHatMode,
    pub flow: FlowParams,
    pub density: Option<DensityBlock>,
    pub shrinker: Option<ShrinkerBlock>,
    pub knorm: Option<KnormBlock>,
    pub ensemble: Option<EnsembleBlock>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<ScenarioConfig, ConfigError> {
        let mut sections = parse_sections(text)?;
        let mut reader = |name: &str| -> Option<SectionReader> {
            sections.remove(name).map(|s| SectionReader {
                name: name.to_string(),
                entries: s.entries,
                line: s.line,
            })
        };

        let mut grid_sec = reader("grid").ok_or(ConfigError {
            line: 0,
            message: "missing required section [grid]".into(),
        })?;
        let n = grid_sec.usize_req("n")?;
        let r = grid_sec.f64_req("r")?;
        let r_prime = grid_sec.f64_req("r_prime")?;
        let nodes = grid_sec.usize_req("N")?;
        let bc = match grid_sec.take("bc") {
            Some((line, v)) => BoundaryMode::parse(&v).map_err(|e| ConfigError {
                line,
                message: e.to_string(),
            })?,
            None => BoundaryMode::OneSided,
        };
        grid_sec.finish()?;
        let grid = GridConfig {
            n,
            r,
            r_prime,
            nodes_per_axis: nodes,
            bc,
        };

        let metric = match reader("metric") {
            None => MetricExpr::Constant(SMat::identity(n.clamp(1, MAX_DIM))),
            Some(mut sec) => {
                let (line, kind) = sec.required("kind")?;
                let expr = match kind.as_str() {
                    "constant" => {
                        let entries = match sec.take("entries") {
                            Some((l, v)) => parse_f64_list(l, "entries", &v)?,
                            None => {
                                let mut id = vec![0.0; n * n];
                                for i in 0..n {
                                    id[i * n + i] = 1.0;
                                }
                                id
                            }
                        };
                        let m = SMat::from_rows(n, &entries, 1e-12).map_err(|e| ConfigError {
                            line,
                            message: format!("metric entries: {e}"),
                        })?;
                        MetricExpr::Constant(m)
                    }
                    "kahler_quartic" => MetricExpr::KahlerQuartic {
                        eps: sec.f64_opt("eps", 0.05)?,
                    },
                    other => {
                        return Err(ConfigError {
                            line,
                            message: format!("unknown metric kind {other:?}"),
                        })
                    }
                };
                sec.finish()?;
                expr
            }
        };

        let initial = match reader("initial") {
            None => PotentialExpr::Flat,
            Some(mut sec) => {
                let (line, kind) = sec.required("kind")?;
                let expr = match kind.as_str() {
                    "flat" => PotentialExpr::Flat,
                    "quadratic" => {
                        let (l, v) = sec.required("a_matrix")?;
                        let entries = parse_f64_list(l, "a_matrix", &v)?;
                        let a = SMat::from_rows(n, &entries, 0.0).map_err(|e| ConfigError {
                            line: l,
                            message: format!("a_matrix: {e}"),
                        })?;
                        PotentialExpr::Quadratic { a, b: sec.f64_opt("b", 0.0)? }
                    }
                    "quartic_bump" => PotentialExpr::QuarticBump {
                        a: sec.f64_req("a")?,
                        w: sec.f64_req("w")?,
                    },
                    "sine" => PotentialExpr::Sine {
                        k: sec.usize_opt("k", 1)? as u32,
                        amp: sec.f64_req("amp")?,
                    },
                    other => {
                        return Err(ConfigError {
                            line,
                            message: format!("unknown initial kind {other:?} (catalog: flat, quadratic, quartic_bump, sine)"),
                        })
                    }
                };
                sec.finish()?;
                expr
            }
        };

        let (theta_hat, flow) = match reader("flow") {
            None => (ThetaHatMode::Average, FlowParams::default()),
            Some(mut sec) => {
                let theta_hat = match sec.take("theta_hat") {
                    None => ThetaHatMode::Average,
                    Some((line, v)) => {
                        if v == "average" {
                            ThetaHatMode::Average
                        } else {
                            ThetaHatMode::Fixed(parse_f64(line, "theta_hat", &v)?)
                        }
                    }
                };
                let scheme = match sec.take("scheme") {
                    None => Scheme::Euler,
                    Some((line, v)) => match v.as_str() {
                        "euler" => Scheme::Euler,
                        "rk2" => Scheme::Rk2,
                        other => {
                            return Err(ConfigError {
                                line,
                                message: format!("unknown scheme {other:?}"),
                            })
                        }
                    },
                };
                let max_f = sec.f64_opt("max_f", 1e3)?;
                if max_f <= 0.0 {
                    return Err(ConfigError {
                        line: sec.line,
                        message: "max_f must be positive".into(),
                    });
                }
                let dt = match sec.take("dt") {
                    Some((line, v)) => Some(parse_f64(line, "dt", &v)?),
                    None => None,
                };
                let params = FlowParams {
                    theta_hat: 0.0, // resolved after the initial angle is known
                    cfl: sec.f64_opt("cfl", 0.4)?,
                    t_end: sec.f64_opt("t_end", 0.01)?,
                    cadence: sec.usize_opt("cadence", 10)?,
                    max_f_guard: max_f,
                    sup_guard: 1e6,
                    scheme,
                    dt,
                };
                sec.finish()?;
                (theta_hat, params)
            }
        };

        let density = match reader("density") {
            None => None,
            Some(mut sec) => {
                let mut x0 = [0.0; MAX_DIM];
                if let Some((l, v)) = sec.take("x0") {
                    let vals = parse_f64_list(l, "x0", &v)?;
                    if vals.len() != n {
                        return Err(ConfigError {
                            line: l,
                            message: format!("x0 needs {n} coordinates"),
                        });
                    }
                    x0[..n].copy_from_slice(&vals);
                }
                let t_prime = sec.f64_req("t_prime")?;
                let cutoff = match sec.take("cutoff") {
                    None => CutoffKind::BoxScaled,
                    Some((line, v)) => match v.as_str() {
                        "box" => CutoffKind::BoxScaled,
                        "none" => CutoffKind::None,
                        other => match other.strip_prefix("family:") {
                            Some(j) => CutoffKind::FamilyJ(j.parse().map_err(|e| ConfigError {
                                line,
                                message: format!("cutoff family index: {e}"),
                            })?),
                            None => {
                                return Err(ConfigError {
                                    line,
                                    message: format!("unknown cutoff {other:?}"),
                                })
                            }
                        },
                    },
                };
                sec.finish()?;
                Some(DensityBlock {
                    x0,
                    t_prime,
                    cutoff,
                })
            }
        };

        let shrinker = match reader("shrinker") {
            None => None,
            Some(mut sec) => {
                let block = ShrinkerBlock {
                    time_shift: sec.f64_req("time_shift")?,
                };
                sec.finish()?;
                Some(block)
            }
        };

        let knorm = match reader("knorm") {
            None => None,
            Some(mut sec) => {
                let alpha = sec.f64_opt("alpha", 0.5)?;
                if !(0.0 < alpha && alpha < 1.0) {
                    return Err(ConfigError {
                        line: sec.line,
                        message: "alpha must lie in (0, 1)".into(),
                    });
                }
                let block = KnormBlock {
                    alpha,
                    stride_x: sec.usize_opt("stride_x", 16)?,
                    stride_t: sec.usize_opt("stride_t", 4)?,
                };
                sec.finish()?;
                Some(block)
            }
        };

        let ensemble = match reader("ensemble") {
            None => None,
            Some(mut sec) => {
                let taus = match sec.take("taus") {
                    Some((l, v)) => parse_f64_list(l, "taus", &v)?,
                    None => vec![1e-3, 4e-3],
                };
                let block = EnsembleBlock {
                    count: sec.usize_opt("count", 10)?,
                    amp: sec.f64_opt("amp", 0.05)?,
                    width: sec.f64_opt("w", 0.125)?,
                    taus,
                };
                sec.finish()?;
                Some(block)
            }
        };

        if let Some((name, s)) = sections.into_iter().next() {
            return Err(ConfigError {
                line: s.line,
                message: format!("unknown section [{name}]"),
            });
        }

        Ok(ScenarioConfig {
            grid,
            metric,
            initial,
            theta_hat,
            flow,
            density,
            shrinker,
            knorm,
            ensemble,
        })
    }

    pub fn build_grid(&self) -> anyhow::Result<Grid> {
        Ok(Grid::new(self.grid)?)
    }

    pub fn build_metric(&self, grid: &Grid) -> anyhow::Result<MetricField> {
        Ok(self.metric.build(grid)?)
    }

    pub fn build_initial(&self, grid: &Grid) -> anyhow::Result<ScalarField> {
        Ok(self.initial.sample(grid)?)
    }
}
