//! Univariate root-finding with multiplicity clustering, and conic–cubic
//! plane-curve intersection by resultant elimination.
//!
//! Numeric roots come from Durand–Kerner iteration. Near an m-fold root the
//! iterates land in a cluster of radius ~eps^(1/m); the cluster mean is the
//! accurate estimate (the leading error terms cancel by symmetry), so
//! multiple roots are recovered by capture-radius clustering, a mean
//! replacement, and a Taylor-coefficient consistency check before the final
//! user-radius clustering.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use crate::linalg::det;
use crate::projective::{canonical_cmp, ProjectivePoint};
use crate::scalar::{rational_sqrt, Cx, Rat, Scalar};
use crate::{derive_seed, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum RootValue<K: Scalar> {
    Finite(K),
    Infinity,
}

/// Projective root multiset of a univariate polynomial; multiplicities sum to
/// the ambient degree (missing top-degree coefficients count at infinity).
#[derive(Debug, Clone)]
pub struct RootList<K: Scalar> {
    pub roots: Vec<(RootValue<K>, usize)>,
}

impl<K: Scalar> RootList<K> {
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|(_, m)| m).sum()
    }

    pub fn finite(&self) -> impl Iterator<Item = (&K, usize)> {
        self.roots.iter().filter_map(|(v, m)| match v {
            RootValue::Finite(t) => Some((t, *m)),
            RootValue::Infinity => None,
        })
    }

    pub fn infinity_multiplicity(&self) -> usize {
        self.roots
            .iter()
            .filter_map(|(v, m)| matches!(v, RootValue::Infinity).then_some(*m))
            .sum()
    }
}

/// Residual of a root against the polynomial, relative to coefficient scale;
/// roots at infinity are evaluated on the reversed polynomial.
pub fn root_residual<K: Scalar>(coeffs: &[K], root: &RootValue<K>) -> f64 {
    let maxc = coeffs.iter().map(|c| c.mag()).fold(0.0f64, f64::max).max(1e-300);
    match root {
        RootValue::Infinity => coeffs.last().map(|c| c.mag()).unwrap_or(0.0) / maxc,
        RootValue::Finite(t) => {
            let mut acc = K::zero();
            for c in coeffs.iter().rev() {
                acc = acc * t.clone() + c.clone();
            }
            let tm = t.mag().max(1.0);
            acc.mag() / (maxc * tm.powi(coeffs.len() as i32 - 1))
        }
    }
}

/// Projective roots of c0 + c1 t + c2 t^2 + c3 t^3.
pub fn cubic_roots<K: Scalar>(coeffs: &[K; 4], cluster_radius: f64) -> Result<RootList<K>> {
    match K::univariate_roots(&coeffs[..], cluster_radius) {
        Err(Error::ZeroPolynomial) => Err(Error::IdenticallyZeroOnLine),
        other => other,
    }
}

// ---------------------------------------------------------------------------
// Exact (rational) roots
// ---------------------------------------------------------------------------

pub fn rational_poly_roots(coeffs: &[Rat]) -> Result<RootList<Rat>> {
    let ambient_degree = coeffs.len().saturating_sub(1);
    let mut c: Vec<Rat> = coeffs.to_vec();
    if c.iter().all(|x| x.is_zero()) {
        return Err(Error::ZeroPolynomial);
    }
    let mut inf_mult = 0usize;
    while c.len() > 1 && c.last().unwrap().is_zero() {
        c.pop();
        inf_mult += 1;
    }
    let mut zero_mult = 0usize;
    while c.len() > 1 && c[0].is_zero() {
        c.remove(0);
        zero_mult += 1;
    }
    let mut mults: BTreeMap<Rat, usize> = BTreeMap::new();
    if zero_mult > 0 {
        mults.insert(Rat::zero(), zero_mult);
    }
    rational_roots_rec(&c, &mut mults)?;
    let mut roots: Vec<(RootValue<Rat>, usize)> = mults
        .into_iter()
        .map(|(r, m)| (RootValue::Finite(r), m))
        .collect();
    if inf_mult > 0 {
        roots.push((RootValue::Infinity, inf_mult));
    }
    let list = RootList { roots };
    debug_assert_eq!(list.total_multiplicity(), ambient_degree);
    Ok(list)
}

fn rational_roots_rec(c: &[Rat], mults: &mut BTreeMap<Rat, usize>) -> Result<()> {
    match c.len() {
        0 | 1 => Ok(()),
        2 => {
            let r = -(c[0].clone() / c[1].clone());
            *mults.entry(r).or_insert(0) += 1;
            Ok(())
        }
        3 => {
            let disc = c[1].clone() * c[1].clone() - Rat::from_i64(4) * c[0].clone() * c[2].clone();
            let Some(sq) = rational_sqrt(&disc) else {
                return Err(Error::IrrationalRoots);
            };
            let two_a = Rat::from_i64(2) * c[2].clone();
            for r in [
                (-c[1].clone() + sq.clone()) / two_a.clone(),
                (-c[1].clone() - sq) / two_a,
            ] {
                *mults.entry(r).or_insert(0) += 1;
            }
            Ok(())
        }
        _ => {
            // Rational root theorem on the denominator-cleared polynomial.
            let ints = crate::scalar::clear_denominators(c);
            let a0 = ints[0].clone();
            let ad = ints.last().unwrap().clone();
            let (Some(a0), Some(ad)) = (big_to_u64(&a0), big_to_u64(&ad)) else {
                return Err(Error::IrrationalRoots);
            };
            for p in divisors(a0) {
                for q in divisors(ad) {
                    for sign in [1i64, -1] {
                        let cand = Rat::new((sign * p as i64).into(), (q as i64).into());
                        if eval_rat(c, &cand).is_zero() {
                            let deflated = deflate_rat(c, &cand);
                            *mults.entry(cand).or_insert(0) += 1;
                            return rational_roots_rec(&deflated, mults);
                        }
                    }
                }
            }
            Err(Error::IrrationalRoots)
        }
    }
}

fn big_to_u64(v: &num_bigint::BigInt) -> Option<u64> {
    use num_traits::Signed;
    let abs = v.abs();
    if abs > num_bigint::BigInt::from(1_000_000_000_000u64) {
        return None;
    }
    use num_traits::ToPrimitive;
    abs.to_u64()
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
        if d > 1_000_000 {
            break;
        }
    }
    out.sort_unstable();
    out
}

fn eval_rat(c: &[Rat], t: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for k in c.iter().rev() {
        acc = acc * t.clone() + k.clone();
    }
    acc
}

fn deflate_rat(c: &[Rat], root: &Rat) -> Vec<Rat> {
    // Synthetic division by (t - root); remainder is zero by construction.
    let n = c.len();
    let mut out = vec![Rat::zero(); n - 1];
    let mut carry = Rat::zero();
    for i in (0..n - 1).rev() {
        carry = c[i + 1].clone() + carry * root.clone();
        out[i] = carry.clone();
    }
    out
}

// ---------------------------------------------------------------------------
// Numeric (complex) roots
// ---------------------------------------------------------------------------

const LEAD_STRIP_REL: f64 = 1e-9;
const HUGE_ROOT: f64 = 1e7;

pub fn complex_poly_roots(coeffs: &[Cx], cluster_radius: f64) -> Result<RootList<Cx>> {
    let ambient_degree = coeffs.len().saturating_sub(1);
    let maxc = coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if maxc == 0.0 {
        return Err(Error::ZeroPolynomial);
    }
    let mut c: Vec<Cx> = coeffs.iter().map(|z| z / maxc).collect();
    let mut inf_mult = 0usize;
    while c.len() > 1 && c.last().unwrap().norm() <= LEAD_STRIP_REL {
        c.pop();
        inf_mult += 1;
    }
    let mut entries: Vec<(Cx, usize)> = Vec::new();
    if c.len() > 1 {
        let mut raw = durand_kerner(&c);
        raw.retain(|z| {
            if z.norm() > HUGE_ROOT {
                inf_mult += 1;
                false
            } else {
                true
            }
        });
        entries = refine_multiple_roots(&c, &raw, cluster_radius);
    }
    // Final user-radius clustering on the refined representatives.
    let clustered = weighted_cluster(&entries, cluster_radius);
    let mut roots: Vec<(RootValue<Cx>, usize)> = clustered
        .into_iter()
        .map(|(z, m)| (RootValue::Finite(z), m))
        .collect();
    roots.sort_by(|a, b| match (&a.0, &b.0) {
        (RootValue::Finite(x), RootValue::Finite(y)) => x
            .re
            .partial_cmp(&y.re)
            .unwrap()
            .then(x.im.partial_cmp(&y.im).unwrap()),
        _ => std::cmp::Ordering::Equal,
    });
    if inf_mult > 0 {
        roots.push((RootValue::Infinity, inf_mult));
    }
    let list = RootList { roots };
    debug_assert_eq!(list.total_multiplicity(), ambient_degree);
    Ok(list)
}

/// Single-linkage clustering of raw values at the given radius; each
/// cluster's multiplicity is its size and its representative is the mean.
pub fn cluster_roots(raw: &[Cx], radius: f64) -> RootList<Cx> {
    assert!(radius > 0.0, "cluster radius must be positive");
    let entries: Vec<(Cx, usize)> = raw.iter().map(|&z| (z, 1)).collect();
    let mut clustered = weighted_cluster(&entries, radius);
    clustered.sort_by(|a, b| a.0.re.partial_cmp(&b.0.re).unwrap().then(a.0.im.partial_cmp(&b.0.im).unwrap()));
    RootList {
        roots: clustered
            .into_iter()
            .map(|(z, m)| (RootValue::Finite(z), m))
            .collect(),
    }
}

fn weighted_cluster(entries: &[(Cx, usize)], radius: f64) -> Vec<(Cx, usize)> {
    let n = entries.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (entries[i].0 - entries[j].0).norm() <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups
        .values()
        .map(|members| {
            let total: usize = members.iter().map(|&i| entries[i].1).sum();
            let mut mean = Cx::new(0.0, 0.0);
            for &i in members {
                mean += entries[i].0 * entries[i].1 as f64;
            }
            (mean / total as f64, total)
        })
        .collect()
}

/// Durand–Kerner iteration; `c` is normalized, ascending, nonzero lead.
fn durand_kerner(c: &[Cx]) -> Vec<Cx> {
    let deg = c.len() - 1;
    if deg == 1 {
        return vec![-c[0] / c[1]];
    }
    if deg == 2 {
        return quadratic_roots(c[0], c[1], c[2]).to_vec();
    }
    let lead = *c.last().unwrap();
    // Cauchy-style radius bound for the initial circle.
    let bound = 1.0
        + c[..deg]
            .iter()
            .map(|z| (z / lead).norm())
            .fold(0.0f64, f64::max);
    let mut z: Vec<Cx> = (0..deg)
        .map(|k| Cx::from_polar(bound, 0.7 + std::f64::consts::TAU * k as f64 / deg as f64))
        .collect();
    for _ in 0..400 {
        let mut max_step = 0.0f64;
        for i in 0..deg {
            let mut denom = lead;
            for j in 0..deg {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() < 1e-300 {
                // Perturb coincident iterates.
                z[i] += Cx::new(1e-6, 1e-6);
                continue;
            }
            let mut val = Cx::new(0.0, 0.0);
            for k in c.iter().rev() {
                val = val * z[i] + k;
            }
            let step = val / denom;
            z[i] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
        }
        if max_step < 1e-15 {
            break;
        }
    }
    z
}

fn quadratic_roots(c0: Cx, c1: Cx, c2: Cx) -> [Cx; 2] {
    let disc = c1 * c1 - 4.0 * c0 * c2;
    let sq = disc.sqrt();
    // Pick the sign that avoids cancellation in -c1 ± sq.
    let q = if (-c1 + sq).norm() >= (-c1 - sq).norm() {
        (-c1 + sq) / 2.0
    } else {
        (-c1 - sq) / 2.0
    };
    if q.norm() > 0.0 {
        [q / c2, c0 / q]
    } else {
        [Cx::new(0.0, 0.0), Cx::new(0.0, 0.0)]
    }
}

/// Taylor coefficients D_k = p^(k)(mu)/k! by repeated synthetic division.
fn taylor_coeffs(c: &[Cx], mu: Cx) -> Vec<Cx> {
    let n = c.len();
    let mut d = c.to_vec();
    for j in 0..n {
        for i in (j..n - 1).rev() {
            let up = d[i + 1];
            d[i] += mu * up;
        }
    }
    d
}

fn poly_derivative(c: &[Cx]) -> Vec<Cx> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, v)| v * k as f64)
        .collect()
}

/// An m-fold root of p is a simple root of p^(m-1); Newton there recovers
/// the root to machine precision where the raw cluster mean is stuck at the
/// eps^(1/m) noise floor.
fn polish_via_derivative(c: &[Cx], start: Cx, m: usize, trust_radius: f64) -> Cx {
    let mut d = c.to_vec();
    for _ in 1..m {
        d = poly_derivative(&d);
    }
    if d.len() < 2 {
        return start;
    }
    let mut z = start;
    for _ in 0..40 {
        let t = taylor_coeffs(&d, z);
        if t[1].norm() < 1e-300 {
            return start;
        }
        let step = t[0] / t[1];
        z -= step;
        if (z - start).norm() > trust_radius {
            return start;
        }
        if step.norm() <= 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// Group converged iterates into multiple roots. A group of size m is
/// accepted as one m-fold root when (a) its spread matches the eps^(1/m)
/// noise scaling of an m-fold root rather than genuinely separate roots, and
/// (b) the Taylor coefficients at the mean are consistent with multiplicity
/// m. Rejected groups are re-split at a quarter of the radius.
fn refine_multiple_roots(c: &[Cx], raw: &[Cx], user_radius: f64) -> Vec<(Cx, usize)> {
    let capture = (10.0 * user_radius).max(2e-3);
    let mut out = Vec::new();
    let entries: Vec<(Cx, usize)> = raw.iter().map(|&z| (z, 1)).collect();
    refine_rec(c, &entries, capture, &mut out);
    // Polish simple roots by Newton; multiple roots keep the cluster mean.
    for (z, m) in out.iter_mut() {
        if *m == 1 {
            for _ in 0..6 {
                let d = taylor_coeffs(c, *z);
                if d[1].norm() < 1e-300 {
                    break;
                }
                let step = d[0] / d[1];
                *z -= step;
                if step.norm() <= 1e-16 * (1.0 + z.norm()) {
                    break;
                }
            }
        }
    }
    out
}

fn refine_rec(c: &[Cx], entries: &[(Cx, usize)], radius: f64, out: &mut Vec<(Cx, usize)>) {
    let groups = linkage_groups(entries, radius);
    for members in groups {
        let total: usize = members.iter().map(|&i| entries[i].1).sum();
        if total == 1 {
            out.push(entries[members[0]].0.then_mult());
            continue;
        }
        let mut mean = Cx::new(0.0, 0.0);
        for &i in &members {
            mean += entries[i].0 * entries[i].1 as f64;
        }
        mean /= total as f64;
        let center = polish_via_derivative(c, mean, total, 4.0 * radius);
        let spread = members
            .iter()
            .map(|&i| (entries[i].0 - center).norm())
            .fold(0.0f64, f64::max);
        if multiple_root_plausible(c, center, spread, total) {
            out.push((center, total));
        } else if radius > 1e-12 && members.len() > 1 {
            let sub: Vec<(Cx, usize)> = members.iter().map(|&i| entries[i]).collect();
            let subgroups = linkage_groups(&sub, radius / 4.0);
            if subgroups.len() == 1 {
                // Cannot split further; record the members individually.
                for &i in &members {
                    out.push(entries[i]);
                }
            } else {
                refine_rec(c, &sub, radius / 4.0, out);
            }
        } else {
            for &i in &members {
                out.push(entries[i]);
            }
        }
    }
}

trait ThenMult {
    fn then_mult(self) -> (Cx, usize);
}
impl ThenMult for Cx {
    fn then_mult(self) -> (Cx, usize) {
        (self, 1)
    }
}

fn linkage_groups(entries: &[(Cx, usize)], radius: f64) -> Vec<Vec<usize>> {
    let n = entries.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (entries[i].0 - entries[j].0).norm() <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

fn multiple_root_plausible(c: &[Cx], mean: Cx, spread: f64, m: usize) -> bool {
    // Noise-scaling test: an m-fold root of a polynomial with ~1e-13 relative
    // coefficient noise spreads its iterates by about (1e-13)^(1/m).
    let noise_spread = 6.0 * 1e-13f64.powf(1.0 / m as f64) * (1.0 + mean.norm());
    if spread > noise_spread {
        return false;
    }
    let d = taylor_coeffs(c, mean);
    if m >= d.len() {
        return false;
    }
    let dm = d[m].norm();
    if dm <= 1e-300 {
        return false;
    }
    let r = spread.max(1e-9 * (1.0 + mean.norm()));
    for (k, dk) in d.iter().enumerate().take(m) {
        let bound = dm * (3.0 * r).powi((m - k) as i32);
        if dk.norm() > bound {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Ternary forms and the conic–cubic intersection
// ---------------------------------------------------------------------------

/// Dense homogeneous form in three variables, keyed by exponent triples.
#[derive(Debug, Clone)]
pub struct TernaryForm<K: Scalar> {
    deg: usize,
    coeffs: BTreeMap<[usize; 3], K>,
}

impl<K: Scalar> TernaryForm<K> {
    pub fn new(deg: usize, coeffs: BTreeMap<[usize; 3], K>) -> Result<Self> {
        for e in coeffs.keys() {
            if e[0] + e[1] + e[2] != deg {
                return Err(Error::Parse(format!(
                    "exponent {e:?} does not have degree {deg}"
                )));
            }
        }
        let mut coeffs = coeffs;
        coeffs.retain(|_, v| !v.is_zero());
        Ok(TernaryForm { deg, coeffs })
    }

    pub fn zero(deg: usize) -> Self {
        TernaryForm {
            deg,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn deg(&self) -> usize {
        self.deg
    }

    pub fn coeffs(&self) -> &BTreeMap<[usize; 3], K> {
        &self.coeffs
    }

    pub fn coeff(&self, e: [usize; 3]) -> K {
        self.coeffs.get(&e).cloned().unwrap_or_else(K::zero)
    }

    pub fn set_coeff(&mut self, e: [usize; 3], v: K) {
        if e[0] + e[1] + e[2] != self.deg {
            panic!("bad exponent degree");
        }
        if v.is_zero() {
            self.coeffs.remove(&e);
        } else {
            self.coeffs.insert(e, v);
        }
    }

    pub fn is_zero_form(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_mag(&self) -> f64 {
        self.coeffs.values().map(|c| c.mag()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: &K) -> Self {
        TernaryForm {
            deg: self.deg,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&e, c)| (e, c.clone() * s.clone()))
                .collect(),
        }
    }

    pub fn eval(&self, p: &[K; 3]) -> K {
        let mut acc = K::zero();
        for (&[a, b, c], coeff) in &self.coeffs {
            let mut term = coeff.clone();
            for _ in 0..a {
                term = term * p[0].clone();
            }
            for _ in 0..b {
                term = term * p[1].clone();
            }
            for _ in 0..c {
                term = term * p[2].clone();
            }
            acc = acc + term;
        }
        acc
    }

    /// Coefficient of z^k, evaluated at (x0, y0).
    pub fn z_slice_eval(&self, k: usize, x0: &K, y0: &K) -> K {
        let mut acc = K::zero();
        for (&[a, b, c], coeff) in &self.coeffs {
            if c != k {
                continue;
            }
            let mut term = coeff.clone();
            for _ in 0..a {
                term = term * x0.clone();
            }
            for _ in 0..b {
                term = term * y0.clone();
            }
            acc = acc + term;
        }
        acc
    }

    fn mul(&self, other: &Self) -> Self {
        let mut coeffs: BTreeMap<[usize; 3], K> = BTreeMap::new();
        for (&ea, ca) in &self.coeffs {
            for (&eb, cb) in &other.coeffs {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                let entry = coeffs.entry(e).or_insert_with(K::zero);
                *entry = entry.clone() + ca.clone() * cb.clone();
            }
        }
        coeffs.retain(|_, v| !v.is_zero());
        TernaryForm {
            deg: self.deg + other.deg,
            coeffs,
        }
    }

    fn add_scaled(&mut self, other: &Self, s: &K) {
        for (&e, c) in &other.coeffs {
            let entry = self.coeffs.entry(e).or_insert_with(K::zero);
            *entry = entry.clone() + c.clone() * s.clone();
        }
        self.coeffs.retain(|_, v| !v.is_zero());
    }

    /// Substitute x_i <- sum_j t[i][j] y_j.
    pub fn transform(&self, t: &[[K; 3]; 3]) -> Self {
        let linear: Vec<TernaryForm<K>> = (0..3)
            .map(|i| {
                let mut coeffs = BTreeMap::new();
                for j in 0..3 {
                    let mut e = [0usize; 3];
                    e[j] = 1;
                    if !t[i][j].is_zero() {
                        coeffs.insert(e, t[i][j].clone());
                    }
                }
                TernaryForm { deg: 1, coeffs }
            })
            .collect();
        let mut result = TernaryForm::zero(self.deg);
        let one = TernaryForm {
            deg: 0,
            coeffs: [([0, 0, 0], K::one())].into_iter().collect(),
        };
        for (&[a, b, c], coeff) in &self.coeffs {
            let mut term = one.clone();
            for _ in 0..a {
                term = term.mul(&linear[0]);
            }
            for _ in 0..b {
                term = term.mul(&linear[1]);
            }
            for _ in 0..c {
                term = term.mul(&linear[2]);
            }
            result.add_scaled(&term, coeff);
        }
        result
    }
}

#[derive(Debug, Clone)]
pub enum PlaneIntersection<K: Scalar> {
    Finite(Vec<(ProjectivePoint<K>, usize)>),
    Infinite { witness: String },
}

/// Lagrange interpolation: coefficients of the unique degree < nodes.len()
/// polynomial through (nodes[i], values[i]).
pub fn lagrange_coeffs<K: Scalar>(nodes: &[K], values: &[K]) -> Vec<K> {
    let n = nodes.len();
    // full(t) = prod (t - nodes[j])
    let mut full = vec![K::one()];
    for node in nodes {
        let mut next = vec![K::zero(); full.len() + 1];
        for (i, c) in full.iter().enumerate() {
            next[i + 1] = next[i + 1].clone() + c.clone();
            next[i] = next[i].clone() - node.clone() * c.clone();
        }
        full = next;
    }
    let mut acc = vec![K::zero(); n];
    for i in 0..n {
        // q_i = full / (t - nodes[i]) by synthetic division.
        let mut q = vec![K::zero(); n];
        let mut carry = K::zero();
        for k in (0..n).rev() {
            carry = full[k + 1].clone() + carry * nodes[i].clone();
            q[k] = carry.clone();
        }
        let mut qi_at_node = K::zero();
        for c in q.iter().rev() {
            qi_at_node = qi_at_node * nodes[i].clone() + c.clone();
        }
        let scale = values[i].clone() / qi_at_node;
        for k in 0..n {
            acc[k] = acc[k].clone() + scale.clone() * q[k].clone();
        }
    }
    acc
}

/// Sylvester determinant of (q, c) in z at the sample point (x0, y0); q has
/// z-degree 2 and c has z-degree 3, so the matrix is 5x5.
fn sylvester_sample<K: Scalar>(q: &TernaryForm<K>, c: &TernaryForm<K>, x0: &K, y0: &K) -> K {
    let qz: Vec<K> = (0..=2).map(|k| q.z_slice_eval(k, x0, y0)).collect();
    let cz: Vec<K> = (0..=3).map(|k| c.z_slice_eval(k, x0, y0)).collect();
    let z = K::zero();
    let rows = vec![
        vec![qz[2].clone(), qz[1].clone(), qz[0].clone(), z.clone(), z.clone()],
        vec![z.clone(), qz[2].clone(), qz[1].clone(), qz[0].clone(), z.clone()],
        vec![z.clone(), z.clone(), qz[2].clone(), qz[1].clone(), qz[0].clone()],
        vec![cz[3].clone(), cz[2].clone(), cz[1].clone(), cz[0].clone(), z.clone()],
        vec![z.clone(), cz[3].clone(), cz[2].clone(), cz[1].clone(), cz[0].clone()],
    ];
    det(&rows)
}

fn random_gl3<K: Scalar>(rng: &mut ChaCha8Rng) -> [[K; 3]; 3] {
    loop {
        let m: Vec<Vec<i64>> = (0..3)
            .map(|_| (0..3).map(|_| rng.gen_range(-3..=3)).collect())
            .collect();
        let d = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        if d != 0 {
            return [
                [K::from_i64(m[0][0]), K::from_i64(m[0][1]), K::from_i64(m[0][2])],
                [K::from_i64(m[1][0]), K::from_i64(m[1][1]), K::from_i64(m[1][2])],
                [K::from_i64(m[2][0]), K::from_i64(m[2][1]), K::from_i64(m[2][2])],
            ];
        }
    }
}

fn identity3<K: Scalar>() -> [[K; 3]; 3] {
    let mut t: [[K; 3]; 3] = [
        [K::zero(), K::zero(), K::zero()],
        [K::zero(), K::zero(), K::zero()],
        [K::zero(), K::zero(), K::zero()],
    ];
    for (i, row) in t.iter_mut().enumerate() {
        row[i] = K::one();
    }
    t
}

/// All intersection points of a plane conic and a plane cubic, multiplicities
/// summing to 6, or the infinite flag when the curves share a component.
///
/// Elimination runs over a coordinate change that keeps both z-leading
/// coefficients away from zero; a vanishing resultant is only believed after
/// the retries all agree. Exact inputs get an exact infinite/finite decision
/// but finite root extraction needs the complex backend.
pub fn conic_cubic_intersect<K: Scalar>(
    q: &TernaryForm<K>,
    c: &TernaryForm<K>,
    seed: u64,
    cluster_radius: f64,
) -> Result<PlaneIntersection<K>> {
    if q.deg() != 2 || c.deg() != 3 {
        return Err(Error::Parse(format!(
            "conic_cubic_intersect needs degrees (2,3), got ({},{})",
            q.deg(),
            c.deg()
        )));
    }
    if q.is_zero_form() || c.is_zero_form() || q.max_mag() == 0.0 || c.max_mag() == 0.0 {
        return Err(Error::ZeroPolynomial);
    }
    // Normalizing by the largest coefficient changes neither zero set.
    let qs = K::one() / max_coeff_scalar(q);
    let cs = K::one() / max_coeff_scalar(c);
    let qn = q.scale(&qs);
    let cn = c.scale(&cs);

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xc0de));
    let mut valid_attempts = 0usize;
    let mut zero_attempts = 0usize;
    let mut zero_magnitudes: Vec<f64> = Vec::new();
    let mut last_failure = String::from("no valid projection found");

    for attempt in 0..6 {
        let t = if attempt == 0 {
            identity3::<K>()
        } else {
            random_gl3::<K>(&mut rng)
        };
        let qt = qn.transform(&t);
        let ct = cn.transform(&t);
        let lead_q = qt.coeff([0, 0, 2]);
        let lead_c = ct.coeff([0, 0, 3]);
        if lead_q.mag() < 1e-6 * qt.max_mag() || lead_c.mag() < 1e-6 * ct.max_mag() {
            continue;
        }
        valid_attempts += 1;

        let nodes = K::interpolation_nodes(7);
        let values: Vec<K> = nodes
            .iter()
            .map(|n| sylvester_sample(&qt, &ct, &K::one(), n))
            .collect();
        let res = lagrange_coeffs(&nodes, &values);
        let res_mag = res.iter().map(|c| c.mag()).fold(0.0f64, f64::max);
        // The resultant is degree 3 in the conic coefficients and degree 2 in
        // the cubic coefficients; 120 covers the determinant expansion and
        // the per-form monomial counts at unit-scale nodes.
        let zero_threshold =
            1e-8 * 120.0 * qt.max_mag().max(1e-300).powi(3) * ct.max_mag().max(1e-300).powi(2);
        let is_zero = if K::EXACT {
            res.iter().all(|c| c.is_zero())
        } else {
            res_mag <= zero_threshold
        };
        if is_zero {
            zero_attempts += 1;
            zero_magnitudes.push(res_mag);
            if K::EXACT {
                // Exact arithmetic admits no spurious zero resultant under a
                // valid projection.
                return Ok(PlaneIntersection::Infinite {
                    witness: "exact resultant identically zero".into(),
                });
            }
            if zero_attempts >= 3 {
                return Ok(PlaneIntersection::Infinite {
                    witness: format!(
                        "resultant identically zero under {} projections (max |coeff| {:.3e})",
                        zero_attempts,
                        zero_magnitudes.iter().cloned().fold(0.0f64, f64::max)
                    ),
                });
            }
            continue;
        }
        if K::EXACT {
            return Err(Error::NeedsComplexBackend(
                "finite conic-cubic enumeration".into(),
            ));
        }

        match finite_intersection(&qt, &ct, &qn, &cn, &t, &res, cluster_radius) {
            Ok(points) => return Ok(PlaneIntersection::Finite(points)),
            Err(e) => {
                last_failure = e.to_string();
                continue;
            }
        }
    }
    if valid_attempts > 0 && zero_attempts == valid_attempts && zero_attempts >= 2 {
        return Ok(PlaneIntersection::Infinite {
            witness: format!(
                "resultant identically zero under {zero_attempts} projections"
            ),
        });
    }
    Err(Error::SolverDegeneracy(format!(
        "conic-cubic intersection failed after retries: {last_failure}"
    )))
}

fn max_coeff_scalar<K: Scalar>(f: &TernaryForm<K>) -> K {
    let mut best = K::one();
    let mut best_mag = 0.0;
    for c in f.coeffs().values() {
        if c.mag() > best_mag {
            best_mag = c.mag();
            best = c.clone();
        }
    }
    best
}

fn finite_intersection<K: Scalar>(
    qt: &TernaryForm<K>,
    ct: &TernaryForm<K>,
    q_orig: &TernaryForm<K>,
    c_orig: &TernaryForm<K>,
    t: &[[K; 3]; 3],
    res: &[K],
    cluster_radius: f64,
) -> Result<Vec<(ProjectivePoint<K>, usize)>> {
    // Numeric-only path.
    let resc: Vec<Cx> = res.iter().map(|c| c.to_complex()).collect();
    let roots = complex_poly_roots(&resc, cluster_radius)?;
    let qtc = to_complex_form(qt);
    let ctc = to_complex_form(ct);
    let mut points = Vec::new();
    for (val, mult) in &roots.roots {
        let (x0, y0) = match val {
            RootValue::Finite(tval) => {
                if tval.norm() > 1.0 {
                    (Cx::new(1.0, 0.0) / tval, Cx::new(1.0, 0.0))
                } else {
                    (Cx::new(1.0, 0.0), *tval)
                }
            }
            RootValue::Infinity => (Cx::new(0.0, 0.0), Cx::new(1.0, 0.0)),
        };
        let z = solve_fiber(&qtc, &ctc, x0, y0)?;
        let mut p = [x0, y0, z];
        if *mult == 1 {
            newton_polish_2d(&qtc, &ctc, &mut p);
        }
        // Back through the coordinate change.
        let tc: Vec<Vec<Cx>> = t
            .iter()
            .map(|row| row.iter().map(|v| v.to_complex()).collect())
            .collect();
        let orig = [
            tc[0][0] * p[0] + tc[0][1] * p[1] + tc[0][2] * p[2],
            tc[1][0] * p[0] + tc[1][1] * p[1] + tc[1][2] * p[2],
            tc[2][0] * p[0] + tc[2][1] * p[1] + tc[2][2] * p[2],
        ];
        let point = ProjectivePoint::new(orig.to_vec())?;
        points.push((point, *mult));
    }
    // Verify every point on both original curves.
    let qc = to_complex_form(q_orig);
    let cc = to_complex_form(c_orig);
    for (p, _) in &points {
        let coords: Vec<Cx> = p.coords().iter().map(|c| c.to_complex()).collect();
        let pa = [coords[0], coords[1], coords[2]];
        let qv = qc.eval(&pa).norm();
        let cv = cc.eval(&pa).norm();
        let sq = 10.0 * qc.max_mag().max(1e-300);
        let sc = 10.0 * cc.max_mag().max(1e-300);
        if qv > 1e-9 * sq || cv > 1e-9 * sc {
            return Err(Error::SolverDegeneracy(format!(
                "intersection point residuals too large: {:.3e}, {:.3e}",
                qv / sq,
                cv / sc
            )));
        }
    }
    // K is complex on this path: rebuild in K via JSON round trip.
    let out: Vec<(ProjectivePoint<K>, usize)> = points
        .iter()
        .map(|(p, m)| {
            let coords = p
                .coords()
                .iter()
                .map(|c| K::from_json(&c.to_json()).expect("complex scalar"))
                .collect();
            (ProjectivePoint::new(coords).expect("nonzero"), *m)
        })
        .collect();
    let mut out = out;
    out.sort_by(|a, b| canonical_cmp(&a.0, &b.0));
    Ok(out)
}

fn to_complex_form<K: Scalar>(f: &TernaryForm<K>) -> TernaryForm<Cx> {
    TernaryForm {
        deg: f.deg(),
        coeffs: f
            .coeffs()
            .iter()
            .map(|(&e, c)| (e, c.to_complex()))
            .collect(),
    }
}

/// Common root in z of the two fiber polynomials over (x0, y0): take the
/// quadratic's roots and keep the one the cubic vanishes on.
fn solve_fiber(
    q: &TernaryForm<Cx>,
    c: &TernaryForm<Cx>,
    x0: Cx,
    y0: Cx,
) -> Result<Cx> {
    let q0 = q.z_slice_eval(0, &x0, &y0);
    let q1 = q.z_slice_eval(1, &x0, &y0);
    let q2 = q.z_slice_eval(2, &x0, &y0);
    let cf: Vec<Cx> = (0..=3).map(|k| c.z_slice_eval(k, &x0, &y0)).collect();
    let cmax = cf.iter().map(|v| v.norm()).fold(0.0f64, f64::max).max(1e-300);
    let eval_c = |z: Cx| -> f64 {
        let v = cf[0] + z * (cf[1] + z * (cf[2] + z * cf[3]));
        v.norm() / (cmax * (1.0 + z.norm()).powi(3))
    };
    let candidates = quadratic_roots(q0, q1, q2);
    let r0 = eval_c(candidates[0]);
    let r1 = eval_c(candidates[1]);
    let (best, best_res, other_res, sep) = if r0 <= r1 {
        (candidates[0], r0, r1, (candidates[0] - candidates[1]).norm())
    } else {
        (candidates[1], r1, r0, (candidates[0] - candidates[1]).norm())
    };
    if best_res > 1e-4 {
        return Err(Error::SolverDegeneracy(format!(
            "no common fiber root (residual {best_res:.3e})"
        )));
    }
    if other_res < 1e-6 && sep > 1e-6 {
        return Err(Error::SolverDegeneracy(
            "two intersection points share a fiber".into(),
        ));
    }
    Ok(best)
}

/// Newton on the dehomogenized 2x2 system (q, c) around p, fixing the largest
/// coordinate. Skipped silently when the Jacobian is (near) singular, which
/// happens exactly at multiplicity > 1 points.
fn newton_polish_2d(q: &TernaryForm<Cx>, c: &TernaryForm<Cx>, p: &mut [Cx; 3]) {
    let fixed = (0..3)
        .max_by(|&a, &b| p[a].norm().partial_cmp(&p[b].norm()).unwrap())
        .unwrap();
    let vars: Vec<usize> = (0..3).filter(|&i| i != fixed).collect();
    for _ in 0..6 {
        let fq = q.eval(p);
        let fc = c.eval(p);
        let h = 1e-7;
        let mut jac = [[Cx::new(0.0, 0.0); 2]; 2];
        for (col, &vi) in vars.iter().enumerate() {
            let mut ph = *p;
            ph[vi] += Cx::new(h, 0.0);
            jac[0][col] = (q.eval(&ph) - fq) / h;
            jac[1][col] = (c.eval(&ph) - fc) / h;
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let jscale = jac
            .iter()
            .flatten()
            .map(|v| v.norm())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        if det.norm() < 1e-10 * jscale * jscale {
            return;
        }
        let dx = (fq * jac[1][1] - fc * jac[0][1]) / det;
        let dy = (fc * jac[0][0] - fq * jac[1][0]) / det;
        p[vars[0]] -= dx;
        p[vars[1]] -= dy;
        if dx.norm() + dy.norm() < 1e-15 * (1.0 + p[vars[0]].norm() + p[vars[1]].norm()) {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::proj_equal;

    fn cx(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    fn rat(v: i64) -> Rat {
        Rat::from_i64(v)
    }

    #[test]
    fn cubic_roots_degree_drop() {
        // t + t^2 with ambient degree 3: roots 0, -1, infinity.
        let r = cubic_roots(&[rat(0), rat(1), rat(1), rat(0)], 1e-7).unwrap();
        assert_eq!(r.total_multiplicity(), 3);
        assert_eq!(r.infinity_multiplicity(), 1);
        let finite: Vec<(Rat, usize)> = r.finite().map(|(t, m)| (t.clone(), m)).collect();
        assert!(finite.contains(&(rat(0), 1)));
        assert!(finite.contains(&(rat(-1), 1)));
    }

    #[test]
    fn cubic_roots_double_zero() {
        let r = cubic_roots(&[rat(0), rat(0), rat(1), rat(0)], 1e-7).unwrap();
        let finite: Vec<(Rat, usize)> = r.finite().map(|(t, m)| (t.clone(), m)).collect();
        assert_eq!(finite, vec![(rat(0), 2)]);
        assert_eq!(r.infinity_multiplicity(), 1);
    }

    #[test]
    fn cubic_roots_fermat_restriction() {
        // 3t + 3t^2 from the line restriction example: roots {0, -1, inf}.
        let r = cubic_roots(&[rat(0), rat(3), rat(3), rat(0)], 1e-7).unwrap();
        let finite: Vec<(Rat, usize)> = r.finite().map(|(t, m)| (t.clone(), m)).collect();
        assert!(finite.contains(&(rat(0), 1)) && finite.contains(&(rat(-1), 1)));
        assert_eq!(r.infinity_multiplicity(), 1);
        // Residual oracle.
        let coeffs = [rat(0), rat(3), rat(3), rat(0)];
        for (v, _) in &r.roots {
            assert_eq!(root_residual(&coeffs, v), 0.0);
        }
    }

    #[test]
    fn cubic_roots_all_zero_rejected() {
        assert!(matches!(
            cubic_roots(&[rat(0), rat(0), rat(0), rat(0)], 1e-7),
            Err(Error::IdenticallyZeroOnLine)
        ));
    }

    #[test]
    fn rational_roots_irrational_detected() {
        // t^2 - 2
        let err = rational_poly_roots(&[rat(-2), rat(0), rat(1)]).unwrap_err();
        assert!(matches!(err, Error::IrrationalRoots));
    }

    #[test]
    fn rational_cubic_with_rational_roots() {
        // (t-1)(t+2)(2t-3) = 2t^3 + t^2 - 7t ... expand: (t-1)(t+2) = t^2+t-2;
        // times (2t-3): 2t^3 - t^2 - 7t + 6.
        let r = rational_poly_roots(&[rat(6), rat(-7), rat(-1), rat(2)]).unwrap();
        let finite: Vec<(Rat, usize)> = r.finite().map(|(t, m)| (t.clone(), m)).collect();
        assert!(finite.contains(&(rat(1), 1)));
        assert!(finite.contains(&(rat(-2), 1)));
        assert!(finite.contains(&(Rat::new(3.into(), 2.into()), 1)));
    }

    #[test]
    fn complex_roots_simple_cubic() {
        // roots 1, 2, 3
        let c = [cx(-6.0, 0.0), cx(11.0, 0.0), cx(-6.0, 0.0), cx(1.0, 0.0)];
        let r = complex_poly_roots(&c, 1e-7).unwrap();
        let mut vals: Vec<f64> = r.finite().map(|(t, _)| t.re).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((vals[0] - 1.0).abs() < 1e-10);
        assert!((vals[1] - 2.0).abs() < 1e-10);
        assert!((vals[2] - 3.0).abs() < 1e-10);
        for (v, _) in &r.roots {
            assert!(root_residual(&c, v) < 1e-9);
        }
    }

    #[test]
    fn complex_roots_triple_root_clusters() {
        // (t^2 + 1)^3 = t^6 + 3t^4 + 3t^2 + 1: roots +-i with multiplicity 3.
        let c = [
            cx(1.0, 0.0),
            cx(0.0, 0.0),
            cx(3.0, 0.0),
            cx(0.0, 0.0),
            cx(3.0, 0.0),
            cx(0.0, 0.0),
            cx(1.0, 0.0),
        ];
        let r = complex_poly_roots(&c, 1e-7).unwrap();
        let finite: Vec<(Cx, usize)> = r.finite().map(|(t, m)| (*t, m)).collect();
        assert_eq!(finite.len(), 2);
        for (z, m) in finite {
            assert_eq!(m, 3);
            assert!((z.norm() - 1.0).abs() < 1e-7);
            assert!(z.re.abs() < 1e-7);
        }
    }

    #[test]
    fn cluster_roots_examples() {
        let r = cluster_roots(&[cx(1.0, 0.0), cx(1.0 + 1e-9, 0.0), cx(5.0, 0.0)], 1e-7);
        let got: Vec<(f64, usize)> = r.finite().map(|(t, m)| (t.re, m)).collect();
        assert_eq!(got.len(), 2);
        assert!(got.contains(&(5.0, 1)));
        assert!(got.iter().any(|&(v, m)| (v - 1.0).abs() < 1e-8 && m == 2));

        let empty = cluster_roots(&[], 1e-7);
        assert!(empty.roots.is_empty());

        // Chain clustering: 0, 2e, 4e with e = radius/2 merge into one.
        let e = 5e-8;
        let r = cluster_roots(&[cx(0.0, 0.0), cx(2.0 * e, 0.0), cx(4.0 * e, 0.0), cx(1.0, 0.0)], 1e-7);
        let mut mults: Vec<usize> = r.finite().map(|(_, m)| m).collect();
        mults.sort_unstable();
        assert_eq!(mults, vec![1, 3]);
    }

    fn tform<K: Scalar>(deg: usize, entries: &[([usize; 3], i64)]) -> TernaryForm<K> {
        TernaryForm::new(
            deg,
            entries
                .iter()
                .map(|&(e, v)| (e, K::from_i64(v)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn conic_cubic_bezout_six() {
        // Q = xy - z^2, C = x^3 + y^3 - 2z^3: the conic parameterizes as
        // (s^2, t^2, st) and C pulls back to (s^3 - t^3)^2, so the
        // intersection is 3 points of multiplicity 2.
        let q = tform::<Cx>(2, &[([1, 1, 0], 1), ([0, 0, 2], -1)]);
        let c = tform::<Cx>(3, &[([3, 0, 0], 1), ([0, 3, 0], 1), ([0, 0, 3], -2)]);
        let out = conic_cubic_intersect(&q, &c, 7, 1e-7).unwrap();
        match out {
            PlaneIntersection::Finite(points) => {
                let total: usize = points.iter().map(|(_, m)| m).sum();
                assert_eq!(total, 6);
                assert_eq!(points.len(), 3);
                assert!(points.iter().all(|(_, m)| *m == 2));
                // (1:1:1) is among them.
                let one = ProjectivePoint::<Cx>::from_ints(&[1, 1, 1]);
                assert!(points
                    .iter()
                    .any(|(p, _)| proj_equal(p, &one, 1e-7).unwrap()));
            }
            _ => panic!("expected finite intersection"),
        }
    }

    #[test]
    fn conic_cubic_common_component_infinite_exact() {
        // Q = x^2, C = x (x^2 + yz): share the component x = 0.
        let q = tform::<Rat>(2, &[([2, 0, 0], 1)]);
        let c = tform::<Rat>(3, &[([3, 0, 0], 1), ([1, 1, 1], 1)]);
        match conic_cubic_intersect(&q, &c, 3, 1e-7).unwrap() {
            PlaneIntersection::Infinite { .. } => {}
            _ => panic!("expected infinite intersection"),
        }
    }

    #[test]
    fn conic_cubic_common_component_infinite_complex() {
        let q = tform::<Cx>(2, &[([2, 0, 0], 1)]);
        let c = tform::<Cx>(3, &[([3, 0, 0], 1), ([1, 1, 1], 1)]);
        match conic_cubic_intersect(&q, &c, 3, 1e-7).unwrap() {
            PlaneIntersection::Infinite { .. } => {}
            _ => panic!("expected infinite intersection"),
        }
    }

    #[test]
    fn conic_cubic_triple_points() {
        // Q = x^2 + y^2, C = z^3: points (1:i:0), (1:-i:0), multiplicity 3.
        let q = tform::<Cx>(2, &[([2, 0, 0], 1), ([0, 2, 0], 1)]);
        let c = tform::<Cx>(3, &[([0, 0, 3], 1)]);
        match conic_cubic_intersect(&q, &c, 11, 1e-7).unwrap() {
            PlaneIntersection::Finite(points) => {
                assert_eq!(points.len(), 2);
                for (p, m) in &points {
                    assert_eq!(*m, 3);
                    // Direct substitution oracle: x^2 + y^2 = 0 and z = 0.
                    let c0 = p.coords()[0].to_complex();
                    let c1 = p.coords()[1].to_complex();
                    let c2 = p.coords()[2].to_complex();
                    assert!((c0 * c0 + c1 * c1).norm() < 1e-8);
                    assert!(c2.norm() < 1e-8);
                }
            }
            _ => panic!("expected finite"),
        }
    }

    #[test]
    fn conic_cubic_exact_finite_requires_complex() {
        let q = tform::<Rat>(2, &[([1, 1, 0], 1), ([0, 0, 2], -1)]);
        let c = tform::<Rat>(3, &[([3, 0, 0], 1), ([0, 3, 0], 1), ([0, 0, 3], -2)]);
        assert!(matches!(
            conic_cubic_intersect(&q, &c, 7, 1e-7),
            Err(Error::NeedsComplexBackend(_))
        ));
    }

    fn random_ternary(rng: &mut ChaCha8Rng, deg: usize) -> TernaryForm<Cx> {
        loop {
            let mut coeffs = BTreeMap::new();
            for a in 0..=deg {
                for b in 0..=(deg - a) {
                    let c = deg - a - b;
                    let v: i64 = rng.gen_range(-5..=5);
                    if v != 0 {
                        coeffs.insert([a, b, c], Cx::from_i64(v));
                    }
                }
            }
            let f = TernaryForm::new(deg, coeffs).unwrap();
            if !f.is_zero_form() {
                return f;
            }
        }
    }

    #[test]
    fn bezout_count_over_seeded_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut done = 0;
        let mut trial = 0u64;
        while done < 200 {
            trial += 1;
            let q = random_ternary(&mut rng, 2);
            let c = random_ternary(&mut rng, 3);
            match conic_cubic_intersect(&q, &c, derive_seed(99, trial), 1e-7) {
                Ok(PlaneIntersection::Finite(points)) => {
                    let total: usize = points.iter().map(|(_, m)| m).sum();
                    assert_eq!(total, 6, "Bezout violated on trial {trial}");
                    done += 1;
                }
                Ok(PlaneIntersection::Infinite { .. }) => {
                    // Random integer pairs essentially never share a factor;
                    // treat as a failure so it cannot hide.
                    panic!("unexpected infinite intersection on trial {trial}");
                }
                Err(e) => panic!("solver degeneracy on trial {trial}: {e}"),
            }
        }
    }

    #[test]
    fn intersection_equivariance_under_coordinate_change() {
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        for trial in 0..20u64 {
            let q = random_ternary(&mut rng, 2);
            let c = random_ternary(&mut rng, 3);
            let t = random_gl3::<Cx>(&mut rng);
            let qt = q.transform(&t);
            let ct = c.transform(&t);
            let a = conic_cubic_intersect(&q, &c, derive_seed(1, trial), 1e-7).unwrap();
            let b = conic_cubic_intersect(&qt, &ct, derive_seed(2, trial), 1e-7).unwrap();
            let (PlaneIntersection::Finite(pa), PlaneIntersection::Finite(pb)) = (a, b) else {
                panic!("expected finite intersections");
            };
            // T maps solutions of the transformed system onto the originals.
            for (p, m) in &pb {
                let w = p.coords();
                let mapped = vec![
                    t[0][0] * w[0] + t[0][1] * w[1] + t[0][2] * w[2],
                    t[1][0] * w[0] + t[1][1] * w[1] + t[1][2] * w[2],
                    t[2][0] * w[0] + t[2][1] * w[1] + t[2][2] * w[2],
                ];
                let mapped = ProjectivePoint::new(mapped).unwrap();
                let hit = pa
                    .iter()
                    .find(|(pp, _)| proj_equal(pp, &mapped, 1e-7).unwrap());
                let Some((_, ma)) = hit else {
                    panic!("unmatched point in equivariance trial {trial}");
                };
                assert_eq!(ma, m);
            }
        }
    }

    #[test]
    fn lagrange_reconstructs_polynomial() {
        let nodes = Rat::interpolation_nodes(5);
        // p(t) = 2 - t + 3t^3
        let eval = |t: &Rat| {
            rat(2) - t.clone() + rat(3) * t.clone() * t.clone() * t.clone()
        };
        let values: Vec<Rat> = nodes.iter().map(eval).collect();
        let coeffs = lagrange_coeffs(&nodes, &values);
        assert_eq!(coeffs[0], rat(2));
        assert_eq!(coeffs[1], rat(-1));
        assert_eq!(coeffs[2], rat(0));
        assert_eq!(coeffs[3], rat(3));
        assert_eq!(coeffs[4], rat(0));
    }
}
