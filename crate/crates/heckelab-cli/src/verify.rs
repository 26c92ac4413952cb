//! Cross-checks of the three multiplicity engines.

use std::collections::BTreeMap;

use heckelab::bundles::{BundleType, ClosedPoint};
use heckelab::hecke::{drop_candidates, Hecke};
use heckelab::oracle::{brute_multiplicity, Budget};
use heckelab::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Outcome {
    pub mode: &'static str,
    pub seed: u64,
    pub checks: u64,
    pub mismatches: Vec<String>,
}

impl Outcome {
    pub fn text(&self) -> String {
        let mut lines = vec![format!(
            "{} verification, seed {}: {} checks, {} mismatches",
            self.mode,
            self.seed,
            self.checks,
            self.mismatches.len()
        )];
        lines.extend(self.mismatches.iter().cloned());
        lines
            .push(if self.mismatches.is_empty() { "ok".to_string() } else { "FAILED".to_string() });
        lines.join("\n")
    }

    fn record(&mut self, what: impl FnOnce() -> String, r: Result<bool>) {
        self.checks += 1;
        match r {
            Ok(true) => {}
            Ok(false) => self.mismatches.push(what()),
            Err(e) => self.mismatches.push(format!("{}: {e}", what())),
        }
    }
}

fn grid(n: usize, hi: i64) -> Vec<BundleType> {
    fn go(cur: &mut Vec<i64>, n: usize, hi: i64, out: &mut Vec<BundleType>) {
        if cur.len() == n {
            out.push(BundleType::new(cur).expect("nonempty"));
            return;
        }
        for v in cur.last().copied().unwrap_or(0)..=hi {
            cur.push(v);
            go(cur, n, hi, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), n, hi, &mut out);
    out
}

/// Oracle census against the closed forms and the Hall engine.
fn oracle_sweep(out: &mut Outcome, hecke: &Hecke, x: &ClosedPoint, n: usize, hi: i64) -> Result<()> {
    let budget = Budget::from_env();
    let (q, d) = (x.q(), x.degree());
    for e in grid(n, hi) {
        for r in 0..=n {
            let census = brute_multiplicity(&e, x, r, &budget)?;
            let mut closed = BTreeMap::new();
            for cand in drop_candidates(&e, d, r) {
                let query = hecke.query(&cand, &e, d, r)?;
                let m = hecke.multiplicity(&query)?.poly;
                let h = hecke.engine().hall_multiplicity(&cand, &e, d, r)?;
                out.record(|| format!("{cand} -> {e}, d={d}, r={r}: closed {m}, hall {h}"), Ok(m == h));
                let v = m.eval_i64(q as i64);
                if v != 0.into() {
                    closed.insert(cand, u64::try_from(v).unwrap_or(u64::MAX));
                }
            }
            out.record(
                || format!("{e}, q={q}, d={d}, r={r}: oracle {census:?}, closed {closed:?}"),
                Ok(census == closed),
            );
        }
    }
    Ok(())
}

/// Random modifications: dispatcher against the Hall engine, and the two
/// expansions of `K_x^r * E` against each other.
fn random_sweep(out: &mut Outcome, hecke: &Hecke, rng: &mut ChaCha8Rng, samples: usize, max_rank: usize) {
    for _ in 0..samples {
        let n = rng.gen_range(1..=max_rank);
        let mut degrees: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=4)).collect();
        degrees.sort_unstable();
        let e = BundleType::new(&degrees).expect("nonempty");
        let d = rng.gen_range(1..=3usize);
        let r = rng.gen_range(1..=n);
        let cands = drop_candidates(&e, d, r);
        let cand = cands[rng.gen_range(0..cands.len())].clone();
        out.record(
            || format!("{cand} -> {e}, d={d}, r={r}: dispatcher vs hall"),
            hecke.query(&cand, &e, d, r).and_then(|q| {
                let m = hecke.multiplicity(&q)?.poly;
                Ok(m == hecke.engine().hall_multiplicity(&cand, &e, d, r)?)
            }),
        );
        out.record(
            || format!("K^{r} * {e}, d={d}: closed vs recursive"),
            hecke
                .engine()
                .kx_times(r, &e, d)
                .and_then(|a| Ok(a == hecke.engine().kx_times_recursive(r, &e, d)?)),
        );
    }
}

pub fn run(full: bool, seed: u64) -> Result<Outcome> {
    let mut out = Outcome { mode: if full { "full" } else { "quick" }, seed, checks: 0, mismatches: Vec::new() };
    let hecke = Hecke::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if full {
        for q in [2u64, 3, 5] {
            for d in 1..=2 {
                let x = ClosedPoint::first_of_degree(q, d)?;
                for n in 1..=3 {
                    oracle_sweep(&mut out, &hecke, &x, n, 3)?;
                }
            }
        }
        for d in 1..=3 {
            oracle_sweep(&mut out, &hecke, &ClosedPoint::first_of_degree(2, d)?, 4, 2)?;
        }
        random_sweep(&mut out, &hecke, &mut rng, 2000, 5);
    } else {
        for q in [2u64, 3] {
            for d in 1..=2 {
                let x = ClosedPoint::first_of_degree(q, d)?;
                for n in 1..=3 {
                    oracle_sweep(&mut out, &hecke, &x, n, 2)?;
                }
            }
        }
        random_sweep(&mut out, &hecke, &mut rng, 200, 4);
    }
    Ok(out)
}
