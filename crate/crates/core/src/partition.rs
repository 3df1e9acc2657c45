//! Evaluation pieces (points and intervals) and ordered partitions of the
//! time axis `[0, T]`.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("time {0} lies outside the horizon [0, {1}]")]
    OutOfRange(f64, f64),
    #[error("pieces do not partition the horizon: {0}")]
    NotAPartition(String),
    #[error("duplicate split time {0}")]
    DuplicateTime(f64),
}

/// A numeric time carrying an optional symbolic label (`s`, `t`, ...) that is
/// used for display only; identity and ordering are by value.
#[derive(Debug, Clone)]
pub struct TimeVal {
    pub value: f64,
    pub label: Option<String>,
}

impl TimeVal {
    pub fn new(value: f64) -> Self {
        TimeVal { value, label: None }
    }

    pub fn labeled(value: f64, label: impl Into<String>) -> Self {
        TimeVal {
            value,
            label: Some(label.into()),
        }
    }
}

impl fmt::Display for TimeVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(l) => write!(f, "{l}"),
            None => write!(f, "{}", self.value),
        }
    }
}

impl PartialEq for TimeVal {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}
impl Eq for TimeVal {}

impl PartialOrd for TimeVal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for TimeVal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value.total_cmp(&other.value)
    }
}

/// One element of an evaluation index: a single point `{t}` or an interval
/// with independently open/closed endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Piece {
    Point(TimeVal),
    Interval {
        lo: TimeVal,
        hi: TimeVal,
        lo_closed: bool,
        hi_closed: bool,
    },
}

impl Piece {
    pub fn point(t: TimeVal) -> Self {
        Piece::Point(t)
    }

    pub fn interval(lo: TimeVal, hi: TimeVal, lo_closed: bool, hi_closed: bool) -> Self {
        debug_assert!(lo.value < hi.value);
        Piece::Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }

    pub fn is_point(&self) -> bool {
        matches!(self, Piece::Point(_))
    }

    pub fn inf(&self) -> f64 {
        match self {
            Piece::Point(t) => t.value,
            Piece::Interval { lo, .. } => lo.value,
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            Piece::Point(t) => t.value,
            Piece::Interval { hi, .. } => hi.value,
        }
    }

    pub fn inf_attained(&self) -> bool {
        match self {
            Piece::Point(_) => true,
            Piece::Interval { lo_closed, .. } => *lo_closed,
        }
    }

    pub fn sup_attained(&self) -> bool {
        match self {
            Piece::Point(_) => true,
            Piece::Interval { hi_closed, .. } => *hi_closed,
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        match self {
            Piece::Point(p) => p.value == t,
            Piece::Interval {
                lo,
                hi,
                lo_closed,
                hi_closed,
            } => {
                (t > lo.value || (*lo_closed && t == lo.value))
                    && (t < hi.value || (*hi_closed && t == hi.value))
            }
        }
    }

    /// Is there a common time in both pieces?
    pub fn overlaps(&self, other: &Piece) -> bool {
        let lo = self.inf().max(other.inf());
        let hi = self.sup().min(other.sup());
        if lo < hi {
            return true;
        }
        if lo > hi {
            return false;
        }
        // Touching at one value: it must be attained on the relevant side of
        // both pieces.
        let a_att = if lo == self.inf() {
            self.inf_attained()
        } else {
            self.sup_attained()
        };
        let b_att = if lo == other.inf() {
            other.inf_attained()
        } else {
            other.sup_attained()
        };
        a_att && b_att
    }

    /// ∃ a ∈ self, b ∈ other with a < b.
    pub fn exists_lt(&self, other: &Piece) -> bool {
        self.inf() < other.sup()
    }

    /// ∃ a ∈ self, b ∈ other with a ≤ b.
    pub fn exists_le(&self, other: &Piece) -> bool {
        self.inf() < other.sup()
            || (self.inf() == other.sup() && self.inf_attained() && other.sup_attained())
    }
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Piece::Point(t) => write!(f, "{{{t}}}"),
            Piece::Interval {
                lo,
                hi,
                lo_closed,
                hi_closed,
            } => {
                let l = if *lo_closed { '[' } else { '(' };
                let r = if *hi_closed { ']' } else { ')' };
                write!(f, "{l}{lo},{hi}{r}")
            }
        }
    }
}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.inf()
            .total_cmp(&other.inf())
            .then(self.sup().total_cmp(&other.sup()))
    }
}

/// An ordered set of disjoint pieces covering `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPartition {
    pieces: Vec<Piece>,
    horizon: f64,
}

impl EvalPartition {
    /// The trivial partition `{[0, T]}`.
    pub fn whole(horizon: f64) -> Self {
        EvalPartition {
            pieces: vec![Piece::interval(
                TimeVal::new(0.0),
                TimeVal::new(horizon),
                true,
                true,
            )],
            horizon,
        }
    }

    pub fn from_pieces(pieces: Vec<Piece>, horizon: f64) -> Result<Self, PartitionError> {
        let p = EvalPartition { pieces, horizon };
        p.validate()?;
        Ok(p)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    fn validate(&self) -> Result<(), PartitionError> {
        if self.pieces.is_empty() {
            return Err(PartitionError::NotAPartition("no pieces".into()));
        }
        // Walk left to right checking seamless coverage.
        let mut cursor = 0.0f64;
        let mut cursor_covered = false; // has `cursor` itself been covered yet
        for piece in &self.pieces {
            if piece.inf() != cursor {
                return Err(PartitionError::NotAPartition(format!(
                    "gap or overlap before {piece}"
                )));
            }
            match (piece.inf_attained(), cursor_covered) {
                (true, true) => {
                    return Err(PartitionError::NotAPartition(format!(
                        "time {cursor} covered twice at {piece}"
                    )))
                }
                (false, false) => {
                    return Err(PartitionError::NotAPartition(format!(
                        "time {cursor} not covered before {piece}"
                    )))
                }
                _ => {}
            }
            cursor = piece.sup();
            cursor_covered = piece.sup_attained();
        }
        if cursor != self.horizon || !cursor_covered {
            return Err(PartitionError::NotAPartition(format!(
                "pieces end at {cursor} but horizon is {}",
                self.horizon
            )));
        }
        Ok(())
    }

    /// Refine the partition so that each time in `tau` becomes a singleton
    /// piece. Times already isolated as points are left alone.
    pub fn split(&self, tau: &[TimeVal]) -> Result<EvalPartition, PartitionError> {
        let mut sorted: Vec<TimeVal> = tau.to_vec();
        sorted.sort();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(PartitionError::DuplicateTime(w[0].value));
            }
        }
        let mut pieces = self.pieces.clone();
        for t in &sorted {
            if t.value < 0.0 || t.value > self.horizon {
                return Err(PartitionError::OutOfRange(t.value, self.horizon));
            }
            let idx = pieces
                .iter()
                .position(|p| p.contains(t.value))
                .ok_or(PartitionError::OutOfRange(t.value, self.horizon))?;
            let old = pieces.remove(idx);
            let mut replacement = Vec::new();
            match old {
                Piece::Point(p) => replacement.push(Piece::Point(p)),
                Piece::Interval {
                    lo,
                    hi,
                    lo_closed,
                    hi_closed,
                } => {
                    if t.value > lo.value {
                        replacement.push(Piece::Interval {
                            lo: lo.clone(),
                            hi: t.clone(),
                            lo_closed,
                            hi_closed: false,
                        });
                    }
                    replacement.push(Piece::Point(t.clone()));
                    if t.value < hi.value {
                        replacement.push(Piece::Interval {
                            lo: t.clone(),
                            hi: hi.clone(),
                            lo_closed: false,
                            hi_closed,
                        });
                    }
                }
            }
            pieces.splice(idx..idx, replacement);
        }
        pieces.sort();
        let out = EvalPartition {
            pieces,
            horizon: self.horizon,
        };
        out.validate()?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(v: f64) -> TimeVal {
        TimeVal::new(v)
    }

    #[test]
    fn split_interior_points() {
        let base = EvalPartition::whole(1.0);
        let split = base.split(&[tv(0.4), tv(0.8)]).unwrap();
        let shown: Vec<String> = split.pieces().iter().map(|p| p.to_string()).collect();
        assert_eq!(shown, vec!["[0,0.4)", "{0.4}", "(0.4,0.8)", "{0.8}", "(0.8,1]"]);
    }

    #[test]
    fn split_empty_tau_is_identity() {
        let base = EvalPartition::whole(2.0);
        assert_eq!(base.split(&[]).unwrap(), base);
    }

    #[test]
    fn split_at_left_boundary() {
        let base = EvalPartition::whole(1.0);
        let split = base.split(&[tv(0.0)]).unwrap();
        let shown: Vec<String> = split.pieces().iter().map(|p| p.to_string()).collect();
        assert_eq!(shown, vec!["{0}", "(0,1]"]);
    }

    #[test]
    fn split_outside_horizon_fails() {
        let base = EvalPartition::whole(1.0);
        assert_eq!(
            base.split(&[tv(1.5)]),
            Err(PartitionError::OutOfRange(1.5, 1.0))
        );
    }

    #[test]
    fn existential_comparisons() {
        let a = Piece::interval(tv(0.0), tv(0.4), true, false);
        let s = Piece::point(tv(0.4));
        let b = Piece::interval(tv(0.4), tv(0.8), false, false);
        assert!(a.exists_lt(&s));
        assert!(!s.exists_lt(&s));
        assert!(s.exists_le(&s));
        assert!(!b.exists_le(&s));
        assert!(s.exists_le(&b));
        assert!(a.exists_lt(&a));
        assert!(!a.overlaps(&s));
        assert!(s.overlaps(&s));
        assert!(!a.overlaps(&b));
    }
}
