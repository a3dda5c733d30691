//! Subshifts of finite type and locally constant functions on them.
//!
//! A [`SftSpec`] is an alphabet plus a 0/1 transition matrix (nearest-neighbour
//! forbidden words). A [`LocallyConstantFn`] assigns a value to every allowed
//! word of length `depth + 1`; potentials carry `f64` scalars, constraints
//! carry exact rational vectors.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::util::{component_is_cyclic, strongly_connected_components};

pub type Symbol = u32;
pub type Word = Vec<Symbol>;

/// Parses a comma-separated word such as "2,3".
pub fn parse_word(s: &str) -> Result<Word> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|part| {
            part.trim().parse::<Symbol>().map_err(|_| Error::WordNotAllowed {
                word: s.to_string(),
                len: s.split(',').count(),
            })
        })
        .collect()
}

/// Comma-separated decimal symbol indices; unambiguous for alphabets >= 10.
pub fn format_word(w: &[Symbol]) -> String {
    w.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}

/// Alphabet plus allowed-transition structure defining the subshift.
///
/// Construction checks that at least one directed cycle exists and that the
/// restriction to symbols lying on cycles is strongly connected (transitive);
/// symbols that are merely transient are tolerated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SftSpec {
    alphabet: usize,
    transitions: Vec<Vec<bool>>,
}

impl SftSpec {
    /// Full shift on `alphabet` symbols.
    pub fn full_shift(alphabet: usize) -> Result<Self> {
        Self::new(alphabet, None)
    }

    /// Validates and builds a spec. `transitions` omitted means the full
    /// shift. On failure every violation found is reported.
    pub fn new(alphabet: usize, transitions: Option<Vec<Vec<bool>>>) -> Result<Self> {
        let mut issues = Vec::new();
        if alphabet == 0 {
            issues.push("alphabet_size must be positive".to_string());
        }
        let transitions = match transitions {
            None => vec![vec![true; alphabet]; alphabet],
            Some(t) => {
                if t.len() != alphabet {
                    issues.push(format!(
                        "transition matrix has {} rows, expected {}",
                        t.len(),
                        alphabet
                    ));
                }
                for (i, row) in t.iter().enumerate() {
                    if row.len() != alphabet {
                        issues.push(format!(
                            "transition matrix row {} has length {}, expected {}",
                            i,
                            row.len(),
                            alphabet
                        ));
                    }
                }
                t
            }
        };
        if issues.is_empty() && alphabet > 0 {
            let adj: Vec<Vec<usize>> = (0..alphabet)
                .map(|i| (0..alphabet).filter(|&j| transitions[i][j]).collect())
                .collect();
            let comps = strongly_connected_components(alphabet, &adj);
            let cyclic: Vec<&Vec<usize>> =
                comps.iter().filter(|c| component_is_cyclic(c, &adj)).collect();
            if cyclic.is_empty() {
                issues.push("transition graph has no directed cycle".to_string());
            } else if cyclic.len() > 1 {
                issues.push(format!(
                    "restriction to symbols on cycles is not strongly connected \
                     ({} recurrent components)",
                    cyclic.len()
                ));
            }
        }
        if issues.is_empty() {
            Ok(SftSpec { alphabet, transitions })
        } else {
            Err(Error::InvalidSpec { issues })
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn allows(&self, from: Symbol, to: Symbol) -> bool {
        self.transitions[from as usize][to as usize]
    }

    pub fn transitions(&self) -> &[Vec<bool>] {
        &self.transitions
    }

    /// True iff every symbol is in range and every adjacent pair is allowed.
    pub fn word_allowed(&self, w: &[Symbol]) -> bool {
        if w.iter().any(|&s| (s as usize) >= self.alphabet) {
            return false;
        }
        w.windows(2).all(|p| self.allows(p[0], p[1]))
    }

    /// All allowed words of the given length, in lexicographic order.
    pub fn allowed_words(&self, len: usize) -> Vec<Word> {
        if len == 0 {
            return vec![Vec::new()];
        }
        let mut words: Vec<Word> = (0..self.alphabet as Symbol).map(|s| vec![s]).collect();
        for _ in 1..len {
            let mut next = Vec::new();
            for w in &words {
                let last = *w.last().unwrap();
                for s in 0..self.alphabet as Symbol {
                    if self.allows(last, s) {
                        let mut ext = w.clone();
                        ext.push(s);
                        next.push(ext);
                    }
                }
            }
            words = next;
        }
        words
    }
}

/// Value types a locally constant function may carry.
pub trait FnValue: Clone + PartialEq + std::fmt::Debug {
    fn dim(&self) -> usize;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    /// Magnitude used for sup-norms: |x| for scalars, Euclidean for vectors.
    fn magnitude(&self) -> f64;
}

impl FnValue for f64 {
    fn dim(&self) -> usize {
        1
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl FnValue for Vec<Rational> {
    fn dim(&self) -> usize {
        self.len()
    }
    fn add(&self, rhs: &Self) -> Self {
        crate::rational::vec_add(self, rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        crate::rational::vec_sub(self, rhs)
    }
    fn magnitude(&self) -> f64 {
        crate::rational::vec_norm_f64(self)
    }
}

/// A function on the shift depending on the first `depth + 1` coordinates.
///
/// Keys of `values` are allowed `(depth+1)`-words; unlisted words take the
/// default value. The owning spec travels with the function so that
/// combinations can verify they talk about the same shift.
#[derive(Debug, Clone, PartialEq)]
pub struct LocallyConstantFn<V> {
    spec: SftSpec,
    depth: usize,
    default: V,
    values: BTreeMap<Word, V>,
}

/// Real-valued potential.
pub type Potential = LocallyConstantFn<f64>;
/// Exact-rational vector constraint.
pub type Constraint = LocallyConstantFn<Vec<Rational>>;

impl<V: FnValue> LocallyConstantFn<V> {
    pub fn new(spec: SftSpec, depth: usize, default: V, values: BTreeMap<Word, V>) -> Result<Self> {
        let dim = default.dim();
        for (word, value) in &values {
            if word.len() != depth + 1 || !spec.word_allowed(word) {
                return Err(Error::WordNotAllowed { word: format_word(word), len: depth + 1 });
            }
            if value.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: value.dim() });
            }
        }
        Ok(LocallyConstantFn { spec, depth, default, values })
    }

    /// Depth-0 constant function.
    pub fn constant(spec: SftSpec, value: V) -> Self {
        LocallyConstantFn { spec, depth: 0, default: value, values: BTreeMap::new() }
    }

    pub fn spec(&self) -> &SftSpec {
        &self.spec
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.default.dim()
    }

    pub fn default_value(&self) -> &V {
        &self.default
    }

    pub fn values(&self) -> &BTreeMap<Word, V> {
        &self.values
    }

    /// Evaluates on any word long enough; only the first `depth + 1` symbols
    /// are inspected.
    pub fn eval(&self, word: &[Symbol]) -> V {
        assert!(word.len() > self.depth, "word too short for evaluation");
        match self.values.get(&word[..=self.depth]) {
            Some(v) => v.clone(),
            None => self.default.clone(),
        }
    }

    /// Re-keys the function on longer words; values are unchanged as a
    /// function on the shift.
    pub fn lift_to_depth(&self, depth: usize) -> Result<Self> {
        if depth < self.depth {
            return Err(Error::Internal(format!(
                "cannot lower depth {} to {}",
                self.depth, depth
            )));
        }
        if depth == self.depth {
            return Ok(self.clone());
        }
        let mut values = BTreeMap::new();
        for word in self.spec.allowed_words(depth + 1) {
            let v = self.eval(&word);
            if v != self.default {
                values.insert(word, v);
            }
        }
        Ok(LocallyConstantFn {
            spec: self.spec.clone(),
            depth,
            default: self.default.clone(),
            values,
        })
    }

    /// Max magnitude over allowed words (a sup-norm for the ambient shift).
    pub fn sup_norm(&self) -> f64 {
        self.spec
            .allowed_words(self.depth + 1)
            .iter()
            .map(|w| self.eval(w).magnitude())
            .fold(0.0, f64::max)
    }
}

impl Potential {
    pub fn scale(&self, t: f64) -> Potential {
        let mut out = self.clone();
        out.default *= t;
        for v in out.values.values_mut() {
            *v *= t;
        }
        out
    }
}

impl Constraint {
    pub fn scale(&self, t: &Rational) -> Constraint {
        let mut out = self.clone();
        out.default = crate::rational::vec_scale(&out.default, t);
        for v in out.values.values_mut() {
            *v = crate::rational::vec_scale(v, t);
        }
        out
    }
}

/// Returns `f + g∘σ − g + shift` as a locally constant function of depth
/// `max(depth_f, depth_g + 1)`. Exact when both inputs are rational-valued.
///
/// Every cycle mean of the result equals the corresponding cycle mean of `f`
/// plus `shift`: the coboundary telescopes around closed orbits.
pub fn add_coboundary<V: FnValue>(
    f: &LocallyConstantFn<V>,
    g: &LocallyConstantFn<V>,
    shift: &V,
) -> Result<LocallyConstantFn<V>> {
    if f.spec != g.spec {
        return Err(Error::SpecMismatch);
    }
    if g.dim() != f.dim() || shift.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: if g.dim() != f.dim() { g.dim() } else { shift.dim() },
        });
    }
    let depth = f.depth.max(g.depth + 1);
    let default = f.default.add(shift);
    let mut values = BTreeMap::new();
    for word in f.spec.allowed_words(depth + 1) {
        // (g∘σ)(x) reads coordinates 1.. of x.
        let v = f.eval(&word).add(&g.eval(&word[1..])).sub(&g.eval(&word)).add(shift);
        if v != default {
            values.insert(word, v);
        }
    }
    Ok(LocallyConstantFn { spec: f.spec.clone(), depth, default, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rational_from_i64;

    fn indicator(spec: &SftSpec, symbol: Symbol) -> Potential {
        let mut values = BTreeMap::new();
        values.insert(vec![symbol], 1.0);
        Potential::new(spec.clone(), 0, 0.0, values).unwrap()
    }

    #[test]
    fn full_shift_is_valid() {
        let spec = SftSpec::full_shift(2).unwrap();
        assert_eq!(spec.alphabet_size(), 2);
        assert!(spec.allows(0, 1));
        assert_eq!(spec.allowed_words(2).len(), 4);
    }

    #[test]
    fn golden_mean_shift_is_valid() {
        // forbid the word "1,1"
        let t = vec![vec![true, true], vec![true, false]];
        let spec = SftSpec::new(2, Some(t)).unwrap();
        assert!(spec.word_allowed(&[0, 1, 0]));
        assert!(!spec.word_allowed(&[1, 1]));
        assert_eq!(spec.allowed_words(2).len(), 3);
    }

    #[test]
    fn non_square_matrix_names_the_row() {
        let t = vec![vec![true, true], vec![true]];
        let err = SftSpec::new(2, Some(t)).unwrap_err();
        match err {
            Error::InvalidSpec { issues } => {
                assert!(issues.iter().any(|m| m.contains("row 1")), "{issues:?}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn zero_alphabet_rejected() {
        assert!(SftSpec::new(0, None).is_err());
    }

    #[test]
    fn acyclic_spec_rejected() {
        // strictly upper triangular: 0 -> 1 only
        let t = vec![vec![false, true], vec![false, false]];
        let err = SftSpec::new(2, Some(t)).unwrap_err();
        match err {
            Error::InvalidSpec { issues } => {
                assert!(issues.iter().any(|m| m.contains("cycle")), "{issues:?}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn two_recurrent_classes_rejected() {
        // two self loops, one-way bridge 0 -> 1
        let t = vec![vec![true, true], vec![false, true]];
        assert!(SftSpec::new(2, Some(t)).is_err());
    }

    #[test]
    fn transient_symbol_tolerated() {
        // symbol 2 feeds into the 0<->1 core but nothing returns to it;
        // restriction to symbols on cycles is {0,1}, strongly connected.
        let t = vec![
            vec![true, true, false],
            vec![true, true, false],
            vec![true, true, false],
        ];
        let spec = SftSpec::new(3, Some(t)).unwrap();
        assert!(spec.word_allowed(&[2, 0, 1]));
    }

    #[test]
    fn eval_uses_prefix_and_default() {
        let spec = SftSpec::full_shift(2).unwrap();
        let f = indicator(&spec, 0);
        assert_eq!(f.eval(&[0, 1, 1]), 1.0);
        assert_eq!(f.eval(&[1, 0]), 0.0);
    }

    #[test]
    fn coboundary_identity_when_g_zero() {
        let spec = SftSpec::full_shift(2).unwrap();
        let f = indicator(&spec, 0);
        let g = Potential::constant(spec.clone(), 0.0);
        let out = add_coboundary(&f, &g, &0.0).unwrap();
        for w in spec.allowed_words(out.depth() + 1) {
            assert_eq!(out.eval(&w), f.eval(&w));
        }
    }

    #[test]
    fn coboundary_of_zero_is_difference() {
        // f = 0, g = 1_[0] depth 0 -> output(x0,x1) = g(x1) - g(x0)
        let spec = SftSpec::full_shift(2).unwrap();
        let f = Potential::constant(spec.clone(), 0.0);
        let g = indicator(&spec, 0);
        let out = add_coboundary(&f, &g, &0.0).unwrap();
        assert_eq!(out.depth(), 1);
        assert_eq!(out.eval(&[0, 1]), -1.0);
        assert_eq!(out.eval(&[1, 0]), 1.0);
        assert_eq!(out.eval(&[0, 0]), 0.0);
        assert_eq!(out.eval(&[1, 1]), 0.0);
    }

    #[test]
    fn coboundary_dimension_mismatch() {
        let spec = SftSpec::full_shift(2).unwrap();
        let f = Constraint::constant(spec.clone(), vec![rational_from_i64(1, 1)]);
        let g = Constraint::constant(
            spec,
            vec![rational_from_i64(1, 1), rational_from_i64(0, 1)],
        );
        assert!(add_coboundary(&f, &g, &vec![rational_from_i64(0, 1)]).is_err());
    }

    #[test]
    fn lift_preserves_values() {
        let spec = SftSpec::full_shift(2).unwrap();
        let f = indicator(&spec, 0);
        let lifted = f.lift_to_depth(2).unwrap();
        for w in spec.allowed_words(3) {
            assert_eq!(lifted.eval(&w), f.eval(&w));
        }
    }

    #[test]
    fn word_round_trip() {
        let w = vec![2u32, 3, 11];
        assert_eq!(parse_word(&format_word(&w)).unwrap(), w);
        assert!(parse_word("1,x").is_err());
    }
}
