//! The analysis pipeline behind `analyze`, and its text rendering.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use num_rational::BigRational;

use crate::error::Result;
use crate::graphs::{self, Interconnection};
use crate::laplacians::WeightMap;
use crate::spectral::{spectrum, MarginClass, SpectralReport};
use crate::structural::{
    falsify_by_sampling, is_ss, is_sss, witness_to_laplacians, FalsifyOptions, SsVerdict,
    SssOptions, SssVerdict,
};
use crate::topology::{classify, fast_path, TopologyKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputSummary {
    pub q: usize,
    pub dissipative: usize,
    pub restorative: usize,
    /// Restorative edges left once those shared with dissipative ones are dropped.
    pub reduced_restorative: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Falsification {
    pub trials: usize,
    pub seed: u64,
    /// `(trial, margin)` of the first pair without a positive margin.
    pub counterexample: Option<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub input: InputSummary,
    pub ss: SsVerdict,
    pub sss: SssVerdict,
    pub topology: TopologyKind,
    pub fast_path: Option<bool>,
    /// Spectrum of the pair built from the witness with unit dissipative weights.
    pub witness_spectrum: Option<SpectralReport>,
    pub falsification: Option<Falsification>,
    pub timings: Vec<(&'static str, Duration)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisOptions {
    pub sss: SssOptions,
    /// Sampling trials and seed; sampling is skipped without a seed.
    pub falsify: Option<(usize, u64)>,
}

fn timed<T>(
    timings: &mut Vec<(&'static str, Duration)>,
    name: &'static str,
    f: impl FnOnce() -> T,
) -> T {
    let start = Instant::now();
    let out = f();
    timings.push((name, start.elapsed()));
    out
}

pub fn analyze(ic: &Interconnection, options: AnalysisOptions) -> Result<AnalysisReport> {
    let mut timings = Vec::new();
    let reduced = timed(&mut timings, "reduce", || graphs::reduce(ic));
    let input = InputSummary {
        q: ic.q(),
        dissipative: ic.dissipative().len(),
        restorative: ic.restorative().len(),
        reduced_restorative: reduced.restorative().len(),
    };
    let ss = timed(&mut timings, "ss", || is_ss(ic));
    let sss = timed(&mut timings, "sss", || is_sss(ic, options.sss))?;
    let (topology, fast) = timed(&mut timings, "topology", || -> Result<_> {
        let class = classify(reduced.q(), &reduced.union_edges())?;
        Ok((class.kind, fast_path(ic)?))
    })?;

    let witness_spectrum = match &sss.witness {
        Some(w) => Some(timed(&mut timings, "certificate", || -> Result<_> {
            let unit = WeightMap::uniform(ic.dissipative().len(), 1.0)?;
            let (d, r) = witness_to_laplacians(ic, &w.to_rationals(), &unit)?;
            spectrum(&d, &r)
        })?),
        None => None,
    };

    let falsification = match options.falsify {
        Some((trials, seed)) if sss.is_sss => {
            Some(timed(&mut timings, "falsify", || -> Result<_> {
                let found = falsify_by_sampling(ic, trials, seed, &FalsifyOptions::default())?;
                Ok(Falsification {
                    trials,
                    seed,
                    counterexample: found.map(|c| (c.trial, c.margin)),
                })
            })?)
        }
        _ => None,
    };

    Ok(AnalysisReport {
        input,
        ss,
        sss,
        topology,
        fast_path: fast,
        witness_spectrum,
        falsification,
        timings,
    })
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

impl AnalysisReport {
    /// Every check that should agree with the general verdict does.
    pub fn inconsistencies(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(f) = self.fast_path {
            if f != self.sss.is_sss {
                out.push(format!(
                    "{} fast path says SSS {} but the general test says {}",
                    self.topology,
                    yes_no(f),
                    yes_no(self.sss.is_sss)
                ));
            }
        }
        if let Some(s) = &self.witness_spectrum {
            if s.classify() == MarginClass::Positive {
                out.push(format!("witness pair has positive margin {:e}", s.margin()));
            }
        }
        if let Some((trial, m)) = self.falsification.as_ref().and_then(|f| f.counterexample) {
            out.push(format!("sampled pair {trial} has margin {m:e} despite SSS"));
        }
        out
    }

    pub fn is_consistent(&self) -> bool {
        self.inconsistencies().is_empty()
    }

    pub fn witness(&self) -> Option<Vec<BigRational>> {
        self.sss.witness.as_ref().map(|w| w.to_rationals())
    }

    pub fn render(&self, with_timings: bool) -> String {
        let i = &self.input;
        let mut out = format!(
            "input: q = {}, dissipative edges = {}, restorative edges = {} ({} after reduction)\n",
            i.q, i.dissipative, i.restorative, i.reduced_restorative
        );
        let ss = if self.ss.is_ss {
            "yes".to_string()
        } else {
            format!("no ({})", self.ss.reason)
        };
        let sss = match &self.sss.witness {
            Some(w) => format!("no; witness x = {w}"),
            None if self.sss.is_sss => {
                format!("yes; patterns refuted: {}", self.sss.refuted_patterns)
            }
            None => "no".to_string(),
        };
        let _ = writeln!(out, "SS: {ss}; SSS: {sss}");
        let _ = writeln!(out, "reason: {}", self.sss.reason);
        let fast = match self.fast_path {
            Some(v) => format!("SSS {}", yes_no(v)),
            None if self.topology == TopologyKind::General => "none".to_string(),
            None => "inconclusive".to_string(),
        };
        let _ = writeln!(out, "topology: {}; fast path: {fast}", self.topology);
        if let Some(s) = &self.witness_spectrum {
            let _ = writeln!(
                out,
                "witness pair margin: {:e} ({})",
                s.margin(),
                s.classify()
            );
        }
        if let Some(f) = &self.falsification {
            match f.counterexample {
                None => {
                    let _ = writeln!(
                        out,
                        "falsification: no counterexample in {} trials (seed {})",
                        f.trials, f.seed
                    );
                }
                Some((t, m)) => {
                    let _ = writeln!(
                        out,
                        "falsification: trial {t} has margin {m:e} (seed {})",
                        f.seed
                    );
                }
            }
        }
        for msg in self.inconsistencies() {
            let _ = writeln!(out, "INCONSISTENT: {msg}");
        }
        if with_timings {
            for (name, d) in &self.timings {
                let _ = writeln!(out, "time {name}: {:.3} ms", d.as_secs_f64() * 1e3);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn run(ic: &Interconnection) -> AnalysisReport {
        analyze(
            ic,
            AnalysisOptions {
                sss: SssOptions::default(),
                falsify: None,
            },
        )
        .unwrap()
    }

    #[test]
    fn example_reports() {
        let one = run(&fixtures::example1()).render(false);
        assert!(
            one.contains("SS: yes; SSS: no; witness x = (2, -1, 1)"),
            "{one}"
        );
        assert!(one.contains("topology: general; fast path: none"), "{one}");
        let two = run(&fixtures::example2()).render(false);
        assert!(
            two.contains("SS: yes; SSS: yes; patterns refuted: 13"),
            "{two}"
        );
        let none =
            run(&Interconnection::from_pairs(3, &[], &[(1, 2), (2, 3)]).unwrap()).render(false);
        assert!(
            none.contains("SS: no (empty-dissipative); SSS: no"),
            "{none}"
        );
    }

    #[test]
    fn gallery_is_consistent() {
        for g in fixtures::gallery() {
            assert!(run(&g.interconnection).is_consistent(), "{}", g.name);
        }
    }
}
