//! Homogeneous cubic forms in n+2 variables, their symmetric trilinear
//! polarization, gradients, and restriction to lines.

use serde_json::Value;
use std::collections::BTreeMap;

use crate::scalar::{Cx, Scalar};
use crate::{Error, Result};

/// A degree-3 monomial as a sorted multiset of variable indices i <= j <= k.
pub type Mono = [usize; 3];

fn sorted_mono(mut m: Mono) -> Mono {
    m.sort_unstable();
    m
}

/// Number of distinct permutations of the index multiset {i,j,k}.
fn multinomial_count(m: Mono) -> i64 {
    let [i, j, k] = m;
    if i == j && j == k {
        1
    } else if i == j || j == k {
        3
    } else {
        6
    }
}

/// The defining form F of X ⊂ P^{n+1}: nonzero homogeneous cubic in
/// `num_vars = n + 2` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousCubic<K: Scalar> {
    num_vars: usize,
    coeffs: BTreeMap<Mono, K>,
}

impl<K: Scalar> HomogeneousCubic<K> {
    pub fn new(num_vars: usize, coeffs: BTreeMap<Mono, K>) -> Result<Self> {
        if num_vars < 4 {
            return Err(Error::DimensionTooSmall(num_vars.saturating_sub(2)));
        }
        let mut normalized: BTreeMap<Mono, K> = BTreeMap::new();
        for (m, v) in coeffs {
            let m = sorted_mono(m);
            if m[2] >= num_vars {
                return Err(Error::Parse(format!(
                    "monomial index {} out of range for {} variables",
                    m[2], num_vars
                )));
            }
            if v.is_zero() {
                continue;
            }
            let entry = normalized.entry(m).or_insert_with(K::zero);
            *entry = entry.clone() + v;
        }
        normalized.retain(|_, v| !v.is_zero());
        if normalized.is_empty() {
            return Err(Error::ZeroForm);
        }
        Ok(HomogeneousCubic {
            num_vars,
            coeffs: normalized,
        })
    }

    /// The Fermat cubic x_0^3 + ... + x_{n+1}^3.
    pub fn fermat(n: usize) -> Self {
        let coeffs = (0..n + 2).map(|i| ([i, i, i], K::one())).collect();
        HomogeneousCubic::new(n + 2, coeffs).expect("fermat form is valid")
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Hypersurface dimension n.
    pub fn dim(&self) -> usize {
        self.num_vars - 2
    }

    pub fn coeffs(&self) -> &BTreeMap<Mono, K> {
        &self.coeffs
    }

    pub fn max_coeff_mag(&self) -> f64 {
        self.coeffs.values().map(|c| c.mag()).fold(0.0, f64::max)
    }

    pub fn evaluate(&self, p: &[K]) -> Result<K> {
        if p.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                got: p.len(),
            });
        }
        let mut acc = K::zero();
        for (&[i, j, k], c) in &self.coeffs {
            acc = acc + c.clone() * p[i].clone() * p[j].clone() * p[k].clone();
        }
        Ok(acc)
    }

    /// Gradient covector; satisfies the Euler identity sum p_i (grad)_i = 3 F(p).
    pub fn gradient(&self, p: &[K]) -> Result<Vec<K>> {
        if p.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                got: p.len(),
            });
        }
        let mut grad = vec![K::zero(); self.num_vars];
        for (&[i, j, k], c) in &self.coeffs {
            // d(x_i x_j x_k)/d x_m summed over occurrences of m.
            grad[i] = grad[i].clone() + c.clone() * p[j].clone() * p[k].clone();
            grad[j] = grad[j].clone() + c.clone() * p[i].clone() * p[k].clone();
            grad[k] = grad[k].clone() + c.clone() * p[i].clone() * p[j].clone();
        }
        Ok(grad)
    }

    /// The unique symmetric trilinear P with P(a,a,a) = F(a).
    pub fn polarize(&self) -> TrilinearForm<K> {
        let entries = self
            .coeffs
            .iter()
            .map(|(&m, c)| {
                let count = K::from_i64(multinomial_count(m));
                (m, c.clone() / count)
            })
            .collect();
        TrilinearForm {
            num_vars: self.num_vars,
            entries,
        }
    }

    pub fn to_complex(&self) -> HomogeneousCubic<Cx> {
        HomogeneousCubic {
            num_vars: self.num_vars,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&m, c)| (m, c.to_complex()))
                .collect(),
        }
    }

    /// Serialize back into the cubic JSON schema.
    pub fn to_spec_json(&self) -> Value {
        let coeffs: Vec<Value> = self
            .coeffs
            .iter()
            .map(|(&[i, j, k], c)| {
                serde_json::json!({ "mono": [i, j, k], "val": c.to_json() })
            })
            .collect();
        serde_json::json!({ "dim": self.dim(), "coeffs": coeffs })
    }
}

/// Parse the cubic JSON schema
/// `{"dim": n, "coeffs": [{"mono": [i,j,k], "val": ...}, ...]}`.
pub fn parse_cubic<K: Scalar>(doc: &Value) -> Result<HomogeneousCubic<K>> {
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::Parse("cubic spec must be a JSON object".into()))?;
    let dim = obj
        .get("dim")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse("missing or invalid \"dim\"".into()))? as usize;
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    let coeff_list = obj
        .get("coeffs")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing \"coeffs\" array".into()))?;
    let mut coeffs: BTreeMap<Mono, K> = BTreeMap::new();
    for entry in coeff_list {
        let mono_val = entry
            .get("mono")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("coefficient entry missing \"mono\"".into()))?;
        if mono_val.len() != 3 {
            return Err(Error::NonCubicMonomial(format!(
                "monomial {mono_val:?} has degree {}",
                mono_val.len()
            )));
        }
        let mut mono = [0usize; 3];
        for (slot, v) in mono.iter_mut().zip(mono_val) {
            *slot = v
                .as_u64()
                .ok_or_else(|| Error::Parse(format!("bad monomial index {v}")))?
                as usize;
            if *slot > dim + 1 {
                return Err(Error::Parse(format!(
                    "monomial index {} exceeds n+1 = {}",
                    slot,
                    dim + 1
                )));
            }
        }
        let val = entry
            .get("val")
            .ok_or_else(|| Error::Parse("coefficient entry missing \"val\"".into()))?;
        let c = K::from_json(val)?;
        let mono = sorted_mono(mono);
        let slot = coeffs.entry(mono).or_insert_with(K::zero);
        *slot = slot.clone() + c;
    }
    HomogeneousCubic::new(dim + 2, coeffs)
}

pub fn parse_cubic_str<K: Scalar>(text: &str) -> Result<HomogeneousCubic<K>> {
    let doc: Value = serde_json::from_str(text)?;
    parse_cubic(&doc)
}

/// Symmetric coefficient tensor P_{ijk}, stored once per multiset i <= j <= k.
#[derive(Debug, Clone, PartialEq)]
pub struct TrilinearForm<K: Scalar> {
    num_vars: usize,
    entries: BTreeMap<Mono, K>,
}

impl<K: Scalar> TrilinearForm<K> {
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn max_entry_mag(&self) -> f64 {
        self.entries.values().map(|c| c.mag()).fold(0.0, f64::max)
    }

    /// Full symmetric evaluation P(a, b, c).
    pub fn eval(&self, a: &[K], b: &[K], c: &[K]) -> Result<K> {
        for v in [a, b, c] {
            if v.len() != self.num_vars {
                return Err(Error::DimensionMismatch {
                    expected: self.num_vars,
                    got: v.len(),
                });
            }
        }
        let mut acc = K::zero();
        for (&[i, j, k], p) in &self.entries {
            // Sum a[s0] b[s1] c[s2] over the distinct permutations of {i,j,k}.
            let sym = if i == j && j == k {
                a[i].clone() * b[i].clone() * c[i].clone()
            } else if i == j {
                a[i].clone() * b[i].clone() * c[k].clone()
                    + a[i].clone() * b[k].clone() * c[i].clone()
                    + a[k].clone() * b[i].clone() * c[i].clone()
            } else if j == k {
                a[i].clone() * b[j].clone() * c[j].clone()
                    + a[j].clone() * b[i].clone() * c[j].clone()
                    + a[j].clone() * b[j].clone() * c[i].clone()
            } else {
                a[i].clone() * b[j].clone() * c[k].clone()
                    + a[i].clone() * b[k].clone() * c[j].clone()
                    + a[j].clone() * b[i].clone() * c[k].clone()
                    + a[j].clone() * b[k].clone() * c[i].clone()
                    + a[k].clone() * b[i].clone() * c[j].clone()
                    + a[k].clone() * b[j].clone() * c[i].clone()
            };
            acc = acc + p.clone() * sym;
        }
        Ok(acc)
    }

    /// Tolerance scale for a P(a,b,c) zero test at the given arguments.
    pub fn eval_scale(&self, a: &[K], b: &[K], c: &[K]) -> f64 {
        let inf = |v: &[K]| v.iter().map(|x| x.mag()).fold(0.0_f64, f64::max).max(1e-300);
        (self.max_entry_mag() * 6.0 * self.num_vars as f64).max(1.0) * inf(a) * inf(b) * inf(c)
    }
}

/// Coefficients of F(x + t v) = c0 + c1 t + c2 t^2 + c3 t^3.
#[derive(Debug, Clone, PartialEq)]
pub struct LineRestriction<K: Scalar> {
    pub c0: K,
    pub c1: K,
    pub c2: K,
    pub c3: K,
}

impl<K: Scalar> LineRestriction<K> {
    /// c0 = F(x), c1 = 3 P(x,x,v), c2 = 3 P(x,v,v), c3 = F(v).
    pub fn compute(
        f: &HomogeneousCubic<K>,
        p: &TrilinearForm<K>,
        x: &[K],
        v: &[K],
    ) -> Result<Self> {
        if proportional(x, v) {
            return Err(Error::DegenerateLine);
        }
        let three = K::from_i64(3);
        Ok(LineRestriction {
            c0: f.evaluate(x)?,
            c1: three.clone() * p.eval(x, x, v)?,
            c2: three * p.eval(x, v, v)?,
            c3: f.evaluate(v)?,
        })
    }

    pub fn coeffs(&self) -> [K; 4] {
        [
            self.c0.clone(),
            self.c1.clone(),
            self.c2.clone(),
            self.c3.clone(),
        ]
    }

    pub fn eval(&self, t: &K) -> K {
        // Horner on c0 + c1 t + c2 t^2 + c3 t^3.
        self.c0.clone()
            + t.clone()
                * (self.c1.clone() + t.clone() * (self.c2.clone() + t.clone() * self.c3.clone()))
    }
}

/// True when the two coordinate vectors are proportional (all 2x2 minors zero,
/// exact test on both backends — used for structural degeneracy, not geometry).
pub fn proportional<K: Scalar>(a: &[K], b: &[K]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            let minor = a[i].clone() * b[j].clone() - a[j].clone() * b[i].clone();
            if !minor.is_zero() {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rat;
    use num_traits::{One, Zero};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fermat3() -> HomogeneousCubic<Rat> {
        HomogeneousCubic::fermat(3)
    }

    fn rat(v: i64) -> Rat {
        Rat::from_i64(v)
    }

    fn rvec(vals: &[i64]) -> Vec<Rat> {
        vals.iter().map(|&v| rat(v)).collect()
    }

    /// Independent summation oracle for the Fermat form.
    fn fermat_oracle(p: &[i64]) -> i64 {
        p.iter().map(|&v| v * v * v).sum()
    }

    #[test]
    fn parse_fermat_spec() {
        let text = r#"{"dim": 3, "coeffs": [
            {"mono": [0,0,0], "val": "1"},
            {"mono": [1,1,1], "val": "1"},
            {"mono": [2,2,2], "val": "1"},
            {"mono": [3,3,3], "val": "1"},
            {"mono": [4,4,4], "val": "1"}
        ]}"#;
        let f: HomogeneousCubic<Rat> = parse_cubic_str(text).unwrap();
        assert_eq!(f, fermat3());
        assert_eq!(f.coeffs().len(), 5);
    }

    #[test]
    fn parse_rejects_non_cubic_monomial() {
        let text = r#"{"dim": 3, "coeffs": [{"mono": [0,1], "val": "1"}]}"#;
        let err = parse_cubic_str::<Rat>(text).unwrap_err();
        assert!(matches!(err, Error::NonCubicMonomial(_)));
    }

    #[test]
    fn parse_rejects_zero_form() {
        let text = r#"{"dim": 3, "coeffs": [
            {"mono": [0,0,1], "val": "2"},
            {"mono": [0,1,0], "val": "-2"}
        ]}"#;
        let err = parse_cubic_str::<Rat>(text).unwrap_err();
        assert!(matches!(err, Error::ZeroForm));
    }

    #[test]
    fn parse_rejects_small_dimension() {
        let text = r#"{"dim": 1, "coeffs": [{"mono": [0,0,0], "val": "1"}]}"#;
        assert!(matches!(
            parse_cubic_str::<Rat>(text).unwrap_err(),
            Error::DimensionTooSmall(1)
        ));
    }

    #[test]
    fn evaluate_fermat_points() {
        let f = fermat3();
        let p = [3, 4, 5, -6, 0];
        assert_eq!(fermat_oracle(&p), 0);
        assert_eq!(f.evaluate(&rvec(&p)).unwrap(), rat(0));
        assert_eq!(f.evaluate(&rvec(&[1, 0, 0, 0, 0])).unwrap(), rat(1));
        assert_eq!(f.evaluate(&rvec(&[0, 0, 0, 0, 0])).unwrap(), rat(0));
        assert!(f.evaluate(&rvec(&[1, 2, 3])).is_err());
    }

    #[test]
    fn gradient_fermat_and_euler() {
        let f = fermat3();
        let g = f.gradient(&rvec(&[3, 4, 5, -6, 0])).unwrap();
        assert_eq!(g, rvec(&[27, 48, 75, 108, 0]));
        let g2 = f.gradient(&rvec(&[1, -1, 0, 0, 0])).unwrap();
        assert_eq!(g2, rvec(&[3, 3, 0, 0, 0]));

        // Euler identity on a random form.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let f = random_form(&mut rng);
            let p: Vec<Rat> = (0..5).map(|_| rat(rng.gen_range(-4..=4))).collect();
            let grad = f.gradient(&p).unwrap();
            let dot = p
                .iter()
                .zip(&grad)
                .fold(Rat::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
            assert_eq!(dot, rat(3) * f.evaluate(&p).unwrap());
        }
    }

    fn random_form(rng: &mut ChaCha8Rng) -> HomogeneousCubic<Rat> {
        loop {
            let mut coeffs = BTreeMap::new();
            for i in 0..5usize {
                for j in i..5 {
                    for k in j..5 {
                        let c: i64 = rng.gen_range(-5..=5);
                        if c != 0 {
                            coeffs.insert([i, j, k], rat(c));
                        }
                    }
                }
            }
            if let Ok(f) = HomogeneousCubic::new(5, coeffs) {
                return f;
            }
        }
    }

    #[test]
    fn polarize_fermat_is_diagonal() {
        let p = fermat3().polarize();
        let a = rvec(&[1, 2, 3, 4, 5]);
        let b = rvec(&[2, -1, 0, 1, 3]);
        let c = rvec(&[0, 0, 1, 1, -2]);
        let expected: Rat = (0..5).fold(Rat::zero(), |acc, i| {
            acc + a[i].clone() * b[i].clone() * c[i].clone()
        });
        assert_eq!(p.eval(&a, &b, &c).unwrap(), expected);
    }

    #[test]
    fn polarize_multinomial_normalization() {
        // F = x0^2 x1: P_{001} = 1/3, diagonal restriction recovers F.
        let f = HomogeneousCubic::<Rat>::new(
            5,
            [([0, 0, 1], rat(1))].into_iter().collect(),
        )
        .unwrap();
        let p = f.polarize();
        let a = rvec(&[2, 3, 0, 0, 0]);
        assert_eq!(p.eval(&a, &a, &a).unwrap(), rat(12)); // 2^2 * 3
        assert_eq!(f.evaluate(&a).unwrap(), rat(12));
    }

    #[test]
    fn polarization_identities_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let f = random_form(&mut rng);
            let p = f.polarize();
            let a: Vec<Rat> = (0..5).map(|_| rat(rng.gen_range(-6..=6))).collect();
            let b: Vec<Rat> = (0..5).map(|_| rat(rng.gen_range(-6..=6))).collect();
            let c: Vec<Rat> = (0..5).map(|_| rat(rng.gen_range(-6..=6))).collect();
            // Diagonal identity.
            assert_eq!(p.eval(&a, &a, &a).unwrap(), f.evaluate(&a).unwrap());
            // Symmetry under a transposition and a 3-cycle (these generate S3).
            let pabc = p.eval(&a, &b, &c).unwrap();
            assert_eq!(pabc, p.eval(&b, &a, &c).unwrap());
            assert_eq!(pabc, p.eval(&c, &a, &b).unwrap());
        }
    }

    #[test]
    fn restriction_fermat_example() {
        let f = fermat3();
        let p = f.polarize();
        let x = rvec(&[1, 0, -1, 0, 0]);
        let v = rvec(&[1, -1, 0, 0, 0]);
        let r = LineRestriction::compute(&f, &p, &x, &v).unwrap();
        assert_eq!(r.coeffs(), [rat(0), rat(3), rat(3), rat(0)]);
    }

    #[test]
    fn restriction_matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let f = random_form(&mut rng);
            let p = f.polarize();
            let x: Vec<Rat> = (0..5).map(|_| rat(rng.gen_range(-5..=5))).collect();
            let v: Vec<Rat> = (0..5).map(|_| rat(rng.gen_range(-5..=5))).collect();
            if proportional(&x, &v) {
                continue;
            }
            let r = LineRestriction::compute(&f, &p, &x, &v).unwrap();
            for t in [-2i64, -1, 0, 1, 3] {
                let t = rat(t);
                let pt: Vec<Rat> = x
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| a.clone() + t.clone() * b.clone())
                    .collect();
                assert_eq!(f.evaluate(&pt).unwrap(), r.eval(&t));
            }
        }
    }

    #[test]
    fn restriction_rejects_proportional_direction() {
        let f = fermat3();
        let p = f.polarize();
        let x = rvec(&[1, 2, 0, 0, 0]);
        let v = rvec(&[2, 4, 0, 0, 0]);
        assert!(matches!(
            LineRestriction::compute(&f, &p, &x, &v),
            Err(Error::DegenerateLine)
        ));
    }

    #[test]
    fn complexified_evaluation_matches() {
        let f = fermat3();
        let fc = f.to_complex();
        let p = [0.5, -1.25, 2.0, 1.0, -0.75];
        let pc: Vec<Cx> = p.iter().map(|&v| Cx::new(v, 0.0)).collect();
        let direct: f64 = p.iter().map(|v| v.powi(3)).sum();
        let got = fc.evaluate(&pc).unwrap();
        assert!((got.re - direct).abs() < 1e-12 && got.im.abs() < 1e-15);
    }
}
