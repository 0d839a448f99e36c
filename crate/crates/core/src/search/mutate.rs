use rand::Rng;
use rand_distr::{Distribution, LogNormal};

use super::SearchConfig;
use crate::expr::{BinaryOp, Expr, UnaryOp};

const MAX_ATTEMPTS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    PerturbConstant,
    ReplaceOperation,
    Graft,
    Prune,
}

impl Move {
    fn draw(rng: &mut impl Rng) -> Self {
        match rng.random_range(0..20) {
            0..7 => Move::PerturbConstant,
            7..11 => Move::ReplaceOperation,
            11..17 => Move::Graft,
            _ => Move::Prune,
        }
    }
}

/// One annealing move. Proposals larger than `config.max_size` are
/// discarded and redrawn; after repeated failures the input is returned
/// unchanged. Variables are drawn from `0..n_vars` only.
pub fn mutate(expr: &Expr, config: &SearchConfig, n_vars: usize, rng: &mut impl Rng) -> Expr {
    for _ in 0..MAX_ATTEMPTS {
        let mv = Move::draw(rng);
        if let Some(e) = apply(expr, mv, config, n_vars, rng) {
            if e.size() <= config.max_size && e != *expr {
                return e;
            }
        }
    }
    expr.clone()
}

pub fn apply(
    expr: &Expr,
    mv: Move,
    config: &SearchConfig,
    n_vars: usize,
    rng: &mut impl Rng,
) -> Option<Expr> {
    let mut out = expr.clone();
    match mv {
        Move::PerturbConstant => {
            let consts = out.constants();
            if consts.is_empty() {
                return None;
            }
            let mut consts = consts;
            let k = rng.random_range(0..consts.len());
            let noise = LogNormal::new(0.0, config.constant_scale).ok()?;
            consts[k] *= noise.sample(rng);
            out.set_constants(&consts);
        }
        Move::ReplaceOperation => {
            let i = rng.random_range(0..out.node_count());
            let node = out.node_mut(i)?;
            *node = match std::mem::replace(node, Expr::Const(0.0)) {
                Expr::Binary(op, a, b) => {
                    let others: Vec<BinaryOp> =
                        config.binary_ops.iter().copied().filter(|o| *o != op).collect();
                    if others.is_empty() {
                        return None;
                    }
                    Expr::Binary(others[rng.random_range(0..others.len())], a, b)
                }
                Expr::Unary(op, a) => {
                    let others: Vec<UnaryOp> =
                        config.unary_ops.iter().copied().filter(|o| *o != op).collect();
                    if others.is_empty() {
                        return None;
                    }
                    Expr::Unary(others[rng.random_range(0..others.len())], a)
                }
                Expr::Var(k) => {
                    if n_vars > 1 && rng.random_bool(0.5) {
                        let j = (k + rng.random_range(1..n_vars)) % n_vars;
                        Expr::Var(j)
                    } else {
                        random_constant(rng)
                    }
                }
                Expr::Const(_) => Expr::Var(rng.random_range(0..n_vars)),
            };
        }
        Move::Graft => {
            // The root gets extra weight so whole-model rewrites such as
            // `c / f` stay reachable from large trees.
            let i = if rng.random_bool(0.25) {
                0
            } else {
                rng.random_range(0..out.node_count())
            };
            let node = out.node_mut(i)?;
            let old = std::mem::replace(node, Expr::Const(0.0));
            *node = if rng.random_bool(0.5) {
                wrap(old, config, n_vars, rng)
            } else {
                random_tree(2, config, n_vars, rng)
            };
        }
        Move::Prune => {
            let internal: Vec<usize> = (0..out.node_count())
                .filter(|&i| matches!(out.node(i), Some(Expr::Unary(..) | Expr::Binary(..))))
                .collect();
            if internal.is_empty() {
                return None;
            }
            let i = internal[rng.random_range(0..internal.len())];
            *out.node_mut(i)? = random_leaf(n_vars, rng);
        }
    }
    Some(out)
}

/// Puts `old` under a new operator whose other operand is a small random
/// subtree.
fn wrap(old: Expr, config: &SearchConfig, n_vars: usize, rng: &mut impl Rng) -> Expr {
    let n_bin = config.binary_ops.len();
    let n_un = config.unary_ops.len();
    let k = rng.random_range(0..n_bin + n_un);
    if k >= n_bin {
        return Expr::unary(config.unary_ops[k - n_bin], old);
    }
    let other = random_tree(1, config, n_vars, rng);
    let op = config.binary_ops[k];
    if rng.random_bool(0.5) {
        Expr::binary(op, old, other)
    } else {
        Expr::binary(op, other, old)
    }
}

/// Random tree of depth at most `depth`.
pub fn random_tree(depth: usize, config: &SearchConfig, n_vars: usize, rng: &mut impl Rng) -> Expr {
    let n_bin = config.binary_ops.len();
    let n_un = config.unary_ops.len();
    if depth == 0 || n_bin + n_un == 0 || rng.random_bool(0.4) {
        return random_leaf(n_vars, rng);
    }
    let k = rng.random_range(0..n_bin + n_un);
    if k >= n_bin {
        Expr::unary(config.unary_ops[k - n_bin], random_tree(depth - 1, config, n_vars, rng))
    } else {
        Expr::binary(
            config.binary_ops[k],
            random_tree(depth - 1, config, n_vars, rng),
            random_tree(depth - 1, config, n_vars, rng),
        )
    }
}

pub fn random_leaf(n_vars: usize, rng: &mut impl Rng) -> Expr {
    if n_vars > 0 && rng.random_bool(0.5) {
        Expr::Var(rng.random_range(0..n_vars))
    } else {
        random_constant(rng)
    }
}

/// Random sign, magnitude log-uniform over six decades.
fn random_constant(rng: &mut impl Rng) -> Expr {
    let mag = 10f64.powf(rng.random_range(-4.0..2.0));
    Expr::Const(if rng.random_bool(0.5) { mag } else { -mag })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn perturbation_keeps_sign() {
        let cfg = SearchConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let positive = (0..10_000)
            .filter(|_| {
                let e = apply(&Expr::Const(1.0), Move::PerturbConstant, &cfg, 1, &mut rng).unwrap();
                matches!(e, Expr::Const(c) if c > 0.0)
            })
            .count();
        assert!(positive > 9_900);
    }

    #[test]
    fn variables_stay_bound_and_size_is_capped() {
        let cfg = SearchConfig {
            max_size: 12,
            ..SearchConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut e = Expr::Const(1.0);
        for _ in 0..5_000 {
            e = mutate(&e, &cfg, 3, &mut rng);
            assert!(e.size() <= 12);
            assert!(e.max_variable().is_none_or(|k| k < 3));
        }
    }

    #[test]
    fn seeded_sequences_repeat() {
        let cfg = SearchConfig::default();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut e = Expr::Var(0);
            (0..200)
                .map(|_| {
                    e = mutate(&e, &cfg, 2, &mut rng);
                    e.to_string()
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(7), run(8));
    }
}
