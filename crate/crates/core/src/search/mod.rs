//! Simulated-annealing symbolic regression over expression trees, feeding a
//! shared Pareto archive of (size, rmse) trade-offs.

mod archive;
mod mutate;
mod polish;

use std::fmt::Write as _;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use archive::{knee, neg_log_error_csv, select, ParetoArchive, ParetoEntry};
pub use mutate::{apply as apply_move, mutate, random_tree, Move};
pub use polish::fit_constants;

use crate::error::{Error, Result};
use crate::expr::{BinaryOp, Expr, UnaryOp};

/// Variable columns plus a target column, all the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub columns: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    pub names: Vec<String>,
}

impl Dataset {
    pub fn new(columns: Vec<Vec<f64>>, target: Vec<f64>) -> Result<Self> {
        let names = (0..columns.len()).map(|k| format!("x{k}")).collect();
        Self::with_names(columns, target, names)
    }

    pub fn with_names(columns: Vec<Vec<f64>>, target: Vec<f64>, names: Vec<String>) -> Result<Self> {
        if target.is_empty() {
            return Err(Error::InvalidArgument("empty dataset".into()));
        }
        if columns.is_empty() {
            return Err(Error::InvalidArgument("dataset has no variable column".into()));
        }
        if names.len() != columns.len() {
            return Err(Error::InvalidArgument(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if let Some(c) = columns.iter().find(|c| c.len() != target.len()) {
            return Err(Error::InvalidArgument(format!(
                "column of length {} against {} targets",
                c.len(),
                target.len()
            )));
        }
        Ok(Self {
            columns,
            target,
            names,
        })
    }

    pub fn rows(&self) -> usize {
        self.target.len()
    }

    pub fn arity(&self) -> usize {
        self.columns.len()
    }

    /// Every `k`-th row, at most `max_rows` of them.
    pub fn thin(&self, max_rows: usize) -> Dataset {
        let n = self.rows();
        if max_rows == 0 || n <= max_rows {
            return self.clone();
        }
        let stride = n.div_ceil(max_rows);
        let pick = |v: &Vec<f64>| v.iter().step_by(stride).copied().collect::<Vec<_>>();
        Dataset {
            columns: self.columns.iter().map(pick).collect(),
            target: pick(&self.target),
            names: self.names.clone(),
        }
    }

    pub fn mean_target(&self) -> f64 {
        self.target.iter().sum::<f64>() / self.rows() as f64
    }

    /// Reads a headed CSV (`#` lines skipped). `features` picks the variable
    /// columns in order; `None` takes every column except the target.
    pub fn from_csv(text: &str, target: &str, features: Option<&[String]>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let find = |name: &str| {
            headers.iter().position(|h| h == name).ok_or_else(|| {
                Error::InvalidArgument(format!("no column `{name}` in {}", headers.join(",")))
            })
        };
        let t = find(target)?;
        let picked: Vec<usize> = match features {
            Some(names) => names.iter().map(|n| find(n)).collect::<Result<_>>()?,
            None => (0..headers.len()).filter(|&k| k != t).collect(),
        };
        let mut columns = vec![Vec::new(); picked.len()];
        let mut target_col = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let num = |k: usize| -> Result<f64> {
                let v = record.get(k).unwrap_or("");
                v.parse::<f64>().map_err(|_| Error::Parse {
                    line: i + 2,
                    message: format!("bad number {v:?} in column `{}`", headers[k]),
                })
            };
            for (col, &k) in columns.iter_mut().zip(&picked) {
                col.push(num(k)?);
            }
            target_col.push(num(t)?);
        }
        let names = picked.iter().map(|&k| headers[k].clone()).collect();
        Self::with_names(columns, target_col, names)
    }
}

/// Root-mean-square error of `expr` over the dataset; any domain fault,
/// non-finite value or unbound variable gives `+inf`.
pub fn rmse(expr: &Expr, data: &Dataset) -> f64 {
    if expr.max_variable().is_some_and(|k| k >= data.arity()) {
        return f64::INFINITY;
    }
    let Some(pred) = expr.eval_columns(&data.columns, data.rows()) else {
        return f64::INFINITY;
    };
    let sse: f64 = pred
        .iter()
        .zip(&data.target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    let r = (sse / data.rows() as f64).sqrt();
    if r.is_finite() {
        r
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub binary_ops: Vec<BinaryOp>,
    pub unary_ops: Vec<UnaryOp>,
    pub max_size: usize,
    /// Proposals per chain.
    pub iterations: usize,
    /// `None` starts at the rmse of the best constant.
    pub initial_temperature: Option<f64>,
    /// Cooling factor applied after each accepted move.
    pub decay: f64,
    /// Proposals without a new best for the chain before it restarts from a
    /// random archive member.
    pub restart_after: usize,
    /// Log-normal sigma of constant perturbations.
    pub constant_scale: f64,
    pub seed: u64,
    pub workers: usize,
    /// Levenberg-Marquardt steps spent on each proposal's constants before
    /// it is scored (0 disables).
    pub refine_steps: usize,
    /// Rows of the thinned dataset used for that refinement.
    pub refine_rows: usize,
    /// Full refinement of every archive entry once the chains finish.
    pub polish: bool,
    pub polish_steps: usize,
    pub log_every: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            binary_ops: BinaryOp::ALL.to_vec(),
            unary_ops: vec![UnaryOp::Cos],
            max_size: 30,
            iterations: 100_000,
            initial_temperature: None,
            decay: 0.999,
            restart_after: 2_000,
            constant_scale: 0.1,
            seed: 0,
            workers: 1,
            refine_steps: 16,
            refine_rows: 64,
            polish: true,
            polish_steps: 200,
            log_every: 1_000,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iteration budget must be at least 1".into()));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::InvalidArgument(format!("decay {} outside (0, 1)", self.decay)));
        }
        if self.max_size == 0 {
            return Err(Error::InvalidArgument("max size must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidArgument("need at least one worker".into()));
        }
        if !(self.constant_scale > 0.0) {
            return Err(Error::InvalidArgument("constant scale must be positive".into()));
        }
        Ok(())
    }

    /// Parses an operation list such as `+,-,*,/,cos` or `add,mul,div,cos`.
    pub fn set_operations(&mut self, list: &str) -> Result<()> {
        let mut binary = Vec::new();
        let mut unary = Vec::new();
        for tok in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let b = match tok {
                "+" | "add" => Some(BinaryOp::Add),
                "-" | "sub" => Some(BinaryOp::Sub),
                "*" | "mul" => Some(BinaryOp::Mul),
                "/" | "div" => Some(BinaryOp::Div),
                _ => None,
            };
            match (b, UnaryOp::from_name(tok)) {
                (Some(op), _) if !binary.contains(&op) => binary.push(op),
                (None, Some(op)) if !unary.contains(&op) => unary.push(op),
                (None, None) => {
                    return Err(Error::InvalidArgument(format!("unknown operation `{tok}`")))
                }
                _ => {}
            }
        }
        if binary.is_empty() && unary.is_empty() {
            return Err(Error::InvalidArgument("empty operation set".into()));
        }
        self.binary_ops = binary;
        self.unary_ops = unary;
        Ok(())
    }

    pub fn operations_string(&self) -> String {
        self.binary_ops
            .iter()
            .map(|o| o.symbol().to_string())
            .chain(self.unary_ops.iter().map(|o| o.name().to_string()))
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProgressRecord {
    pub iteration: usize,
    pub temperature: f64,
    pub best_rmse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub archive: ParetoArchive,
    /// Progress of the first chain.
    pub progress: Vec<ProgressRecord>,
}

impl SearchOutcome {
    pub fn progress_csv(&self) -> String {
        let mut out = String::from("iteration,temperature,best_rmse\n");
        for p in &self.progress {
            let _ = writeln!(out, "{},{},{}", p.iteration, p.temperature, p.best_rmse);
        }
        out
    }
}

/// Runs `config.workers` annealing chains against one shared archive.
pub fn search(data: &Dataset, config: &SearchConfig) -> Result<SearchOutcome> {
    config.validate()?;
    let base = Expr::Const(data.mean_target());
    let t0 = config
        .initial_temperature
        .unwrap_or_else(|| rmse(&base, data))
        .max(f64::MIN_POSITIVE);
    let shared = Mutex::new(ParetoArchive::new());
    shared.lock().unwrap().insert(ParetoEntry::new(base.clone(), rmse(&base, data)));

    let refine_data = data.thin(config.refine_rows);
    let chain = |worker: usize| {
        Chain {
            data,
            refine_data: &refine_data,
            config,
            archive: &shared,
            t0,
        }
        .run(worker, base.clone())
    };
    let progress = if config.workers == 1 {
        chain(0)
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..config.workers)
                .map(|w| s.spawn(move || chain(w)))
                .collect();
            let mut logs: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
            logs.swap_remove(0)
        })
    };

    let mut archive = shared.into_inner().unwrap();
    if config.polish {
        polish_archive(&mut archive, data, config.polish_steps);
        sweep_archive(&mut archive, data, &refine_data, config);
    }
    Ok(SearchOutcome { archive, progress })
}

/// Refines every entry's constants on the full data and re-inserts the
/// results.
pub fn polish_archive(archive: &mut ParetoArchive, data: &Dataset, steps: usize) {
    let polished: Vec<ParetoEntry> = archive
        .entries()
        .iter()
        .map(|e| {
            let (expr, r) = fit_constants(&e.expr, data, steps);
            ParetoEntry::new(expr, r)
        })
        .collect();
    for e in polished {
        archive.insert(e);
    }
}

/// Deterministic one-move neighbourhood of every archive entry: each node
/// replaced by a constant, a variable or one of its operands, and each node
/// wrapped as `c + node`, `c * node` or `c / node` when the operation is
/// enabled. Constants are refitted on `refine_data`; candidates that enter
/// the archive get `config.polish_steps` more on the full data. Repeats while
/// the archive changes, at most twelve rounds.
pub fn sweep_archive(
    archive: &mut ParetoArchive,
    data: &Dataset,
    refine_data: &Dataset,
    config: &SearchConfig,
) {
    let n_vars = data.arity();
    let steps = 4 * config.refine_steps.max(16);
    let wraps: Vec<BinaryOp> = [BinaryOp::Add, BinaryOp::Mul, BinaryOp::Div]
        .into_iter()
        .filter(|op| config.binary_ops.contains(op))
        .collect();
    let mut seen = std::collections::HashSet::new();
    for _ in 0..12 {
        let before: Vec<String> = archive.entries().iter().map(|e| e.expr.to_string()).collect();
        let pending: Vec<Expr> = archive
            .entries()
            .iter()
            .filter(|e| seen.insert(e.expr.to_string()))
            .map(|e| e.expr.clone())
            .collect();
        for expr in pending {
            for i in 0..expr.node_count() {
                let mut leaves = Vec::new();
                match expr.node(i) {
                    Some(Expr::Var(_)) => leaves.push(Expr::Const(1.0)),
                    Some(Expr::Unary(_, a)) => {
                        leaves.push(Expr::Const(1.0));
                        leaves.extend((0..n_vars).map(Expr::Var));
                        leaves.push((**a).clone());
                    }
                    Some(Expr::Binary(_, l, r)) => {
                        leaves.push(Expr::Const(1.0));
                        leaves.extend((0..n_vars).map(Expr::Var));
                        leaves.push((**l).clone());
                        leaves.push((**r).clone());
                    }
                    _ => {}
                }
                if let Some(node) = expr.node(i) {
                    for &op in &wraps {
                        leaves.push(Expr::binary(op, Expr::Const(1.0), node.clone()));
                    }
                }
                for leaf in leaves {
                    let mut cand = expr.clone();
                    if let Some(node) = cand.node_mut(i) {
                        *node = leaf;
                    }
                    let cand = cand.fold_constants();
                    if cand.size() > config.max_size {
                        continue;
                    }
                    let cand = fit_constants(&cand, refine_data, steps).0;
                    let r = rmse(&cand, data);
                    if archive.insert(ParetoEntry::new(cand.clone(), r)) && config.polish_steps > 0 {
                        let (fine, r) = fit_constants(&cand, data, config.polish_steps);
                        archive.insert(ParetoEntry::new(fine, r));
                    }
                }
            }
        }
        let after: Vec<String> = archive.entries().iter().map(|e| e.expr.to_string()).collect();
        if after == before {
            break;
        }
    }
}

struct Chain<'a> {
    data: &'a Dataset,
    refine_data: &'a Dataset,
    config: &'a SearchConfig,
    archive: &'a Mutex<ParetoArchive>,
    t0: f64,
}

impl Chain<'_> {
    fn run(&self, worker: usize, start: Expr) -> Vec<ProgressRecord> {
        let cfg = self.config;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(worker as u64);
        let n_vars = self.data.arity();
        let mut log = Vec::new();

        let mut current = start;
        let mut current_rmse = rmse(&current, self.data);
        let mut temperature = self.t0;
        let mut best = current_rmse;
        let mut stale = 0usize;

        for it in 0..cfg.iterations {
            let mut cand = mutate(&current, cfg, n_vars, &mut rng).fold_constants();
            if cfg.refine_steps > 0 {
                cand = fit_constants(&cand, self.refine_data, cfg.refine_steps).0;
            }
            let cand_rmse = rmse(&cand, self.data);
            if cand_rmse.is_finite() {
                self.archive
                    .lock()
                    .unwrap()
                    .insert(ParetoEntry::new(cand.clone(), cand_rmse));
            }

            let accept = cand_rmse <= current_rmse
                || (cand_rmse.is_finite()
                    && rng.random::<f64>() < (-(cand_rmse - current_rmse) / temperature).exp());
            if accept {
                current = cand;
                current_rmse = cand_rmse;
                temperature *= cfg.decay;
            }
            if current_rmse < best {
                best = current_rmse;
                stale = 0;
            } else {
                stale += 1;
                if stale >= cfg.restart_after {
                    let archive = self.archive.lock().unwrap();
                    let e = &archive.entries()[rng.random_range(0..archive.len())];
                    current = e.expr.clone();
                    current_rmse = e.rmse;
                    best = current_rmse;
                    temperature = self.t0;
                    stale = 0;
                }
            }

            if worker == 0 && cfg.log_every > 0 && (it + 1) % cfg.log_every == 0 {
                log.push(ProgressRecord {
                    iteration: it + 1,
                    temperature,
                    best_rmse: self.archive.lock().unwrap().best_rmse(),
                });
            }
        }
        log
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_basics() {
        let d = Dataset::new(vec![vec![1.0, 2.0, 3.0]], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(rmse(&Expr::Var(0), &d), 0.0);
        assert!((rmse(&Expr::Const(2.0), &d) - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(rmse(&Expr::Var(1), &d), f64::INFINITY);
        let fault = Expr::div(Expr::Const(1.0), Expr::sub(Expr::Var(0), Expr::Const(2.0)));
        assert_eq!(rmse(&fault, &d), f64::INFINITY);
    }

    #[test]
    fn identity_target_is_found() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64 / 7.0).collect();
        let d = Dataset::new(vec![xs.clone()], xs).unwrap();
        let cfg = SearchConfig {
            iterations: 500,
            ..SearchConfig::default()
        };
        let out = search(&d, &cfg).unwrap();
        let e = &out.archive.entries()[..];
        assert!(e.iter().any(|e| e.size == 1 && e.rmse == 0.0 && e.expr == Expr::Var(0)));
    }

    #[test]
    fn csv_columns_are_selected_by_name() {
        let text = "# note\na,b,y\n1,2,3\n4,5,6\n";
        let d = Dataset::from_csv(text, "y", None).unwrap();
        assert_eq!(d.columns, vec![vec![1.0, 4.0], vec![2.0, 5.0]]);
        assert_eq!(d.target, vec![3.0, 6.0]);
        let d = Dataset::from_csv(text, "a", Some(&["b".to_string()])).unwrap();
        assert_eq!((d.names, d.target), (vec!["b".to_string()], vec![1.0, 4.0]));
        assert!(Dataset::from_csv(text, "z", None).is_err());
        assert!(Dataset::from_csv("a,y\n1,x\n", "y", None).is_err());
    }

    #[test]
    fn operation_lists() {
        let mut c = SearchConfig::default();
        c.set_operations("add, mul,div,cos").unwrap();
        assert_eq!(c.binary_ops, vec![BinaryOp::Add, BinaryOp::Mul, BinaryOp::Div]);
        assert_eq!(c.operations_string(), "+,*,/,cos");
        assert!(c.set_operations("pow").is_err());
        assert!(c.set_operations("").is_err());
    }

    #[test]
    fn zero_budget_is_an_error() {
        let d = Dataset::new(vec![vec![1.0]], vec![1.0]).unwrap();
        let cfg = SearchConfig {
            iterations: 0,
            ..SearchConfig::default()
        };
        assert!(search(&d, &cfg).is_err());
    }
}
