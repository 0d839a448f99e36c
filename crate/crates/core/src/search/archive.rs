use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::expr::{Expr, Parser};

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoEntry {
    pub size: usize,
    pub rmse: f64,
    pub expr: Expr,
}

impl ParetoEntry {
    pub fn new(expr: Expr, rmse: f64) -> Self {
        Self {
            size: expr.size(),
            rmse,
            expr,
        }
    }

    /// `self` is at least as small and at least as accurate as `other`.
    pub fn weakly_dominates(&self, other: &ParetoEntry) -> bool {
        self.size <= other.size && self.rmse <= other.rmse
    }

    /// Weak dominance with at least one strict inequality.
    pub fn dominates(&self, other: &ParetoEntry) -> bool {
        self.weakly_dominates(other) && (self.size < other.size || self.rmse < other.rmse)
    }
}

/// Non-dominated set of candidates, kept sorted by size. Sizes are distinct
/// and rmse strictly decreases along the archive.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParetoArchive {
    entries: Vec<ParetoEntry>,
}

impl ParetoArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[ParetoEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn into_entries(self) -> Vec<ParetoEntry> {
        self.entries
    }

    pub fn best_rmse(&self) -> f64 {
        self.entries.last().map_or(f64::INFINITY, |e| e.rmse)
    }

    /// Inserts `entry` unless a member weakly dominates it (an exact
    /// `(size, rmse)` tie keeps the incumbent). Members the entry dominates
    /// are evicted. Entries with a non-finite rmse are never stored.
    pub fn insert(&mut self, entry: ParetoEntry) -> bool {
        if !entry.rmse.is_finite() {
            return false;
        }
        // First member with size > entry.size; everything before is smaller or equal.
        let pos = self.entries.partition_point(|e| e.size <= entry.size);
        if pos > 0 && self.entries[pos - 1].rmse <= entry.rmse {
            return false;
        }
        let mut start = pos;
        if start > 0 && self.entries[start - 1].size == entry.size {
            start -= 1;
        }
        let end = start
            + self.entries[start..]
                .iter()
                .take_while(|e| e.rmse >= entry.rmse)
                .count();
        self.entries.splice(start..end, std::iter::once(entry));
        true
    }

    /// Archive CSV `size,rmse,expression`, sorted by size, canonical `x<k>`
    /// variables.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("size,rmse,expression\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{}", e.size, e.rmse, e.expr);
        }
        out
    }

    /// Reads an archive CSV; `#` lines are skipped. Rows are re-inserted, so
    /// a dominated row is dropped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let parser = Parser::default();
        let mut archive = Self::new();
        let mut header_seen = false;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !header_seen {
                if line != "size,rmse,expression" {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: "expected header `size,rmse,expression`".into(),
                    });
                }
                header_seen = true;
                continue;
            }
            let bad = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let mut parts = line.splitn(3, ',');
            let (Some(size), Some(rmse), Some(expr)) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(bad("expected three fields".into()));
            };
            let rmse: f64 = rmse
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad rmse {rmse:?}")))?;
            let expr = parser.parse(expr).map_err(|e| bad(e.to_string()))?;
            let size: usize = size
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad size {size:?}")))?;
            if size != expr.size() {
                return Err(bad(format!(
                    "size column says {size}, expression has size {}",
                    expr.size()
                )));
            }
            archive.insert(ParetoEntry { size, rmse, expr });
        }
        Ok(archive)
    }
}

/// Steepest drop in `ln rmse` per unit of size between consecutive entries
/// (sorted by size). Ties go to the smaller entry. Zero errors are floored at
/// the smallest positive double so exact fits stay selectable.
pub fn knee(entries: &[ParetoEntry]) -> Result<&ParetoEntry> {
    let mut sorted: Vec<&ParetoEntry> = entries
        .iter()
        .filter(|e| e.rmse.is_finite() && e.rmse >= 0.0)
        .collect();
    if sorted.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "knee needs at least two finite entries, got {}",
            sorted.len()
        )));
    }
    sorted.sort_by_key(|e| e.size);
    let log_err = |e: &ParetoEntry| e.rmse.max(f64::MIN_POSITIVE).ln();
    let mut best: Option<(f64, &ParetoEntry)> = None;
    for w in sorted.windows(2) {
        let ds = w[1].size.saturating_sub(w[0].size).max(1) as f64;
        let slope = (log_err(w[0]) - log_err(w[1])) / ds;
        if best.is_none_or(|(s, _)| slope > s) {
            best = Some((slope, w[1]));
        }
    }
    Ok(best.expect("at least one pair").1)
}

/// Knee with a fallback for archives holding a single entry.
pub fn select(entries: &[ParetoEntry]) -> Result<&ParetoEntry> {
    match entries.iter().filter(|e| e.rmse.is_finite()).count() {
        0 => Err(Error::InvalidArgument("empty archive".into())),
        1 => Ok(entries.iter().find(|e| e.rmse.is_finite()).unwrap()),
        _ => knee(entries),
    }
}

/// `(size, -ln rmse)` series for plotting the front.
pub fn neg_log_error_csv(entries: &[ParetoEntry]) -> String {
    let mut out = String::from("size,neg_log_error\n");
    for e in entries {
        let _ = writeln!(out, "{},{}", e.size, -e.rmse.max(f64::MIN_POSITIVE).ln());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(size: usize, rmse: f64) -> ParetoEntry {
        ParetoEntry {
            size,
            rmse,
            expr: Expr::Const(size as f64),
        }
    }

    fn shape(a: &ParetoArchive) -> Vec<(usize, f64)> {
        a.entries().iter().map(|e| (e.size, e.rmse)).collect()
    }

    #[test]
    fn dominated_entry_is_rejected() {
        let mut a = ParetoArchive::new();
        assert!(a.insert(e(4, 0.05)));
        assert!(!a.insert(e(5, 0.1)));
        assert!(!a.insert(e(4, 0.05)));
        assert_eq!(shape(&a), vec![(4, 0.05)]);
    }

    #[test]
    fn dominating_entry_evicts() {
        let mut a = ParetoArchive::new();
        a.insert(e(4, 0.05));
        a.insert(e(6, 0.02));
        assert!(a.insert(e(3, 0.01)));
        assert_eq!(shape(&a), vec![(3, 0.01)]);
    }

    #[test]
    fn same_size_better_error_replaces() {
        let mut a = ParetoArchive::new();
        a.insert(e(1, 0.5));
        a.insert(e(4, 0.05));
        a.insert(e(9, 0.01));
        assert!(a.insert(e(4, 0.02)));
        assert_eq!(shape(&a), vec![(1, 0.5), (4, 0.02), (9, 0.01)]);
        assert!(a.insert(e(5, 0.015)));
        assert_eq!(shape(&a), vec![(1, 0.5), (4, 0.02), (5, 0.015), (9, 0.01)]);
        assert!(!a.insert(e(2, f64::NAN)));
    }

    #[test]
    fn knee_of_two_entries_is_the_second() {
        let v = vec![e(1, 0.1), e(3, 0.01)];
        assert_eq!(knee(&v).unwrap().size, 3);
        assert!(knee(&v[..1]).is_err());
        assert_eq!(select(&v[..1]).unwrap().size, 1);
    }

    #[test]
    fn knee_accepts_exact_fits() {
        let v = vec![e(1, 0.3), e(3, 0.0), e(5, 0.0)];
        assert_eq!(knee(&v).unwrap().size, 3);
    }

    #[test]
    fn csv_round_trip() {
        let mut a = ParetoArchive::new();
        a.insert(ParetoEntry::new(Expr::Const(1.5), 0.088));
        a.insert(ParetoEntry::new(
            crate::expr::parse("1.51/(1 + 0.0927*cos(x0 + 0.5445))").unwrap(),
            1.3e-4,
        ));
        let text = a.to_csv();
        assert!(text.starts_with("size,rmse,expression\n1,0.088,1.5\n"));
        assert_eq!(ParetoArchive::from_csv(&text).unwrap(), a);
        assert!(ParetoArchive::from_csv("size,rmse,expression\n2,0.1,x0\n").is_err());
    }
}
