//! Projective points, lines and tangent frames of P^{n+1}, with canonical
//! representatives and seeded random sampling.

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::forms::{proportional, HomogeneousCubic};
use crate::linalg::{complex_rank, rational_rank, RankResult};
use crate::scalar::{rational_sqrt, Cx, Rat, Scalar};
use crate::solve::RootValue;
use crate::{derive_seed, Error, Result};

/// A point of P^{n+1} held by its canonical representative: first nonzero
/// coordinate scaled to 1 on the exact backend, largest-modulus coordinate
/// scaled to 1 on the complex backend.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint<K: Scalar> {
    coords: Vec<K>,
}

impl<K: Scalar> ProjectivePoint<K> {
    pub fn new(coords: Vec<K>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        let pivot = K::canonical_pivot(&coords).ok_or(Error::ZeroVector)?;
        let inv = K::one() / coords[pivot].clone();
        let coords: Vec<K> = coords.into_iter().map(|c| c * inv.clone()).collect();
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ProjectivePoint { coords })
    }

    pub fn from_ints(vals: &[i64]) -> Self {
        ProjectivePoint::new(vals.iter().map(|&v| K::from_i64(v)).collect())
            .expect("nonzero integer vector")
    }

    pub fn coords(&self) -> &[K] {
        &self.coords
    }

    pub fn num_vars(&self) -> usize {
        self.coords.len()
    }

    pub fn max_mag(&self) -> f64 {
        self.coords.iter().map(|c| c.mag()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.coords.iter().map(|c| c.to_json()).collect())
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Parse("point must be a JSON array".into()))?;
        let coords = arr.iter().map(K::from_json).collect::<Result<Vec<_>>>()?;
        ProjectivePoint::new(coords)
    }

    pub fn to_complex(&self) -> ProjectivePoint<Cx> {
        ProjectivePoint::new(self.coords.iter().map(|c| c.to_complex()).collect())
            .expect("canonical representative is nonzero")
    }
}

/// Equality in P^{n+1}: all 2x2 minors of the coordinate matrix vanish,
/// exactly (rational) or below `tol` times the coordinate scale (complex).
pub fn proj_equal<K: Scalar>(
    p: &ProjectivePoint<K>,
    q: &ProjectivePoint<K>,
    tol: f64,
) -> Result<bool> {
    if p.num_vars() != q.num_vars() {
        return Err(Error::DimensionMismatch {
            expected: p.num_vars(),
            got: q.num_vars(),
        });
    }
    let scale = p.max_mag() * q.max_mag();
    let a = p.coords();
    let b = q.coords();
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            let minor = a[i].clone() * b[j].clone() - a[j].clone() * b[i].clone();
            if !minor.nearly_zero(tol * scale) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Deterministic ordering of canonical representatives, used to make
/// seed-reproducible choices among root points.
pub fn canonical_cmp<K: Scalar>(p: &ProjectivePoint<K>, q: &ProjectivePoint<K>) -> std::cmp::Ordering {
    for (a, b) in p.coords().iter().zip(q.coords()) {
        let (ar, ai) = {
            let c = a.to_complex();
            (c.re, c.im)
        };
        let (br, bi) = {
            let c = b.to_complex();
            (c.re, c.im)
        };
        match ar.partial_cmp(&br).unwrap_or(std::cmp::Ordering::Equal) {
            std::cmp::Ordering::Equal => {}
            o => return o,
        }
        match ai.partial_cmp(&bi).unwrap_or(std::cmp::Ordering::Equal) {
            std::cmp::Ordering::Equal => {}
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Rank of the span of coordinate vectors, with backend-appropriate evidence.
pub fn span_rank<K: Scalar>(vectors: &[Vec<K>], tol: f64) -> RankResult {
    assert!(!vectors.is_empty(), "span_rank needs a nonempty list");
    let len = vectors[0].len();
    assert!(vectors.iter().all(|v| v.len() == len));
    if K::EXACT {
        let rows: Vec<Vec<Rat>> = vectors
            .iter()
            .map(|v| {
                v.iter()
                    .map(|c| {
                        // Exact backend means the scalars are rationals; go
                        // through JSON to avoid specializing the generic.
                        Rat::from_json(&c.to_json()).expect("exact scalar is rational")
                    })
                    .collect()
            })
            .collect();
        rational_rank(&rows)
    } else {
        let rows: Vec<Vec<Cx>> = vectors
            .iter()
            .map(|v| v.iter().map(|c| c.to_complex()).collect())
            .collect();
        complex_rank(&rows, tol)
    }
}

/// A line of P^{n+1} spanned by two independent representative points.
#[derive(Debug, Clone)]
pub struct ProjectiveLine<K: Scalar> {
    base: ProjectivePoint<K>,
    dir: ProjectivePoint<K>,
}

impl<K: Scalar> ProjectiveLine<K> {
    pub fn new(base: ProjectivePoint<K>, dir: ProjectivePoint<K>) -> Result<Self> {
        if base.num_vars() != dir.num_vars() {
            return Err(Error::DimensionMismatch {
                expected: base.num_vars(),
                got: dir.num_vars(),
            });
        }
        if proportional(base.coords(), dir.coords()) {
            return Err(Error::CoincidentPoints);
        }
        Ok(ProjectiveLine { base, dir })
    }

    pub fn base(&self) -> &ProjectivePoint<K> {
        &self.base
    }

    pub fn dir(&self) -> &ProjectivePoint<K> {
        &self.dir
    }

    /// The point base + t * dir (affine chart missing `dir` itself).
    pub fn point_at(&self, t: &K) -> Result<ProjectivePoint<K>> {
        let coords = self
            .base
            .coords()
            .iter()
            .zip(self.dir.coords())
            .map(|(a, b)| a.clone() + t.clone() * b.clone())
            .collect();
        ProjectivePoint::new(coords)
    }

    /// Containment test via the rank of [base; dir; p].
    pub fn contains(&self, p: &ProjectivePoint<K>, tol: f64) -> bool {
        let rows = vec![
            self.base.coords().to_vec(),
            self.dir.coords().to_vec(),
            p.coords().to_vec(),
        ];
        span_rank(&rows, tol).rank == 2
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({ "base": self.base.to_json(), "dir": self.dir.to_json() })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let base = ProjectivePoint::from_json(
            v.get("base")
                .ok_or_else(|| Error::Parse("line missing \"base\"".into()))?,
        )?;
        let dir = ProjectivePoint::from_json(
            v.get("dir")
                .ok_or_else(|| Error::Parse("line missing \"dir\"".into()))?,
        )?;
        ProjectiveLine::new(base, dir)
    }
}

pub fn line_through<K: Scalar>(
    p: &ProjectivePoint<K>,
    q: &ProjectivePoint<K>,
    tol: f64,
) -> Result<ProjectiveLine<K>> {
    if proj_equal(p, q, tol)? {
        return Err(Error::CoincidentPoints);
    }
    ProjectiveLine::new(p.clone(), q.clone())
}

/// Basis of the projective tangent space at a smooth point of X: n vectors
/// spanning ker(grad F) together with the point itself.
#[derive(Debug, Clone)]
pub struct TangentFrame<K: Scalar> {
    pub point: ProjectivePoint<K>,
    pub covector: Vec<K>,
    pub basis: Vec<Vec<K>>,
    grad_pivot: usize,
    point_pivot: usize,
}

impl<K: Scalar> TangentFrame<K> {
    /// Build the frame from the gradient covector at `point`. The kernel of
    /// the covector has the basis k_i = e_i - (g_i/g_j) e_j (i != j) with j
    /// the gradient pivot; any kernel vector w decomposes as w = sum w_i k_i.
    /// Dropping the index m where the point's own coefficient is largest
    /// leaves n vectors completing the point to a kernel basis.
    pub fn build(point: ProjectivePoint<K>, covector: Vec<K>) -> Result<Self> {
        let n_vars = point.num_vars();
        if covector.len() != n_vars {
            return Err(Error::DimensionMismatch {
                expected: n_vars,
                got: covector.len(),
            });
        }
        let j = K::canonical_pivot(&covector).ok_or(Error::SingularPoint(
            "zero gradient covector".into(),
        ))?;
        let mut point_coeffs = point.coords().to_vec();
        point_coeffs[j] = K::zero();
        let m = K::canonical_pivot(&point_coeffs).ok_or(Error::SingularPoint(
            "point proportional to a gradient axis".into(),
        ))?;
        let gj_inv = K::one() / covector[j].clone();
        let mut basis = Vec::with_capacity(n_vars - 2);
        for i in 0..n_vars {
            if i == j || i == m {
                continue;
            }
            let mut k_i = vec![K::zero(); n_vars];
            k_i[i] = K::one();
            k_i[j] = -(covector[i].clone() * gj_inv.clone());
            basis.push(k_i);
        }
        Ok(TangentFrame {
            point,
            covector,
            basis,
            grad_pivot: j,
            point_pivot: m,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of an ambient tangent vector `w` (with grad . w = 0) in the
    /// frame basis, i.e. modulo the point direction. Closed form: with pivots
    /// j (gradient) and m (point), alpha = w_m / x_m and the i-th coordinate
    /// is w_i - alpha x_i.
    pub fn reduce(&self, w: &[K]) -> Result<Vec<K>> {
        if w.len() != self.point.num_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.point.num_vars(),
                got: w.len(),
            });
        }
        let x = self.point.coords();
        let alpha = w[self.point_pivot].clone() / x[self.point_pivot].clone();
        let mut out = Vec::with_capacity(self.basis.len());
        for i in 0..w.len() {
            if i == self.grad_pivot || i == self.point_pivot {
                continue;
            }
            out.push(w[i].clone() - alpha.clone() * x[i].clone());
        }
        Ok(out)
    }

    /// Ambient vector with the given frame coordinates.
    pub fn lift(&self, coords: &[K]) -> Vec<K> {
        let n_vars = self.point.num_vars();
        let mut out = vec![K::zero(); n_vars];
        for (c, b) in coords.iter().zip(&self.basis) {
            for i in 0..n_vars {
                out[i] = out[i].clone() + c.clone() * b[i].clone();
            }
        }
        out
    }
}

/// Seeded random point of the hypersurface, complex backend: intersect a
/// random line with X and take a root, then polish along the line.
pub fn random_point_on_cubic_complex(
    f: &HomogeneousCubic<Cx>,
    seed: u64,
    membership_tol: f64,
) -> Result<ProjectivePoint<Cx>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nv = f.num_vars();
    let p = f.polarize();
    for _ in 0..64 {
        let a: Vec<Cx> = (0..nv).map(|_| Cx::sample_unit(&mut rng)).collect();
        let b: Vec<Cx> = (0..nv).map(|_| Cx::sample_unit(&mut rng)).collect();
        if proportional(&a, &b) {
            continue;
        }
        let three = Cx::new(3.0, 0.0);
        let c = [
            f.evaluate(&a)?,
            three * p.eval(&a, &a, &b)?,
            three * p.eval(&a, &b, &b)?,
            f.evaluate(&b)?,
        ];
        let Ok(roots) = Cx::univariate_roots(&c, 1e-7) else {
            continue;
        };
        // Deterministic choice: smallest finite root in (re, im) order.
        let mut finite: Vec<Cx> = roots
            .roots
            .iter()
            .filter_map(|(v, _)| match v {
                RootValue::Finite(t) => Some(*t),
                RootValue::Infinity => None,
            })
            .collect();
        finite.sort_by(|x, y| {
            x.re.partial_cmp(&y.re)
                .unwrap()
                .then(x.im.partial_cmp(&y.im).unwrap())
        });
        let Some(&t0) = finite.first() else { continue };
        // Newton along the line on the cubic c0 + c1 t + c2 t^2 + c3 t^3.
        let mut t = t0;
        for _ in 0..8 {
            let val = c[0] + t * (c[1] + t * (c[2] + t * c[3]));
            let dv = c[1] + t * (Cx::new(2.0, 0.0) * c[2] + t * Cx::new(3.0, 0.0) * c[3]);
            if dv.norm() < 1e-14 {
                break;
            }
            t -= val / dv;
        }
        let coords: Vec<Cx> = a.iter().zip(&b).map(|(x, y)| x + t * y).collect();
        let Ok(pt) = ProjectivePoint::new(coords) else {
            continue;
        };
        let scale = f.max_coeff_mag().max(1.0) * pt.max_mag().powi(3);
        if f.evaluate(pt.coords())?.nearly_zero(membership_tol * scale) {
            return Ok(pt);
        }
    }
    Err(Error::ResampleLimit("random complex point on cubic".into()))
}

/// Residual intersection of X with a random secant line through `base`: the
/// quadratic factor of the restriction must have a square discriminant, so
/// this only occasionally yields a point.
fn secant_residual(
    f: &HomogeneousCubic<Rat>,
    p: &crate::forms::TrilinearForm<Rat>,
    base: &ProjectivePoint<Rat>,
    rng: &mut ChaCha8Rng,
) -> Option<ProjectivePoint<Rat>> {
    use rand::Rng;
    let nv = f.num_vars();
    let d: Vec<Rat> = (0..nv).map(|_| Rat::sample_int(rng, 20)).collect();
    if d.iter().all(|c| c.is_zero()) || proportional(base.coords(), &d) {
        return None;
    }
    // F(base + t d) = t (c1 + c2 t + c3 t^2) since F(base) = 0.
    let three = Rat::from_i64(3);
    let c1 = three.clone() * p.eval(base.coords(), base.coords(), &d).ok()?;
    let c2 = three * p.eval(base.coords(), &d, &d).ok()?;
    let c3 = f.evaluate(&d).ok()?;
    let candidates: Vec<Rat> = if c3.is_zero() {
        if c2.is_zero() {
            return None;
        }
        vec![-c1 / c2]
    } else {
        let disc = c2.clone() * c2.clone() - Rat::from_i64(4) * c1.clone() * c3.clone();
        let sq = rational_sqrt(&disc)?;
        let two_c3 = Rat::from_i64(2) * c3;
        let pick: bool = rng.gen();
        let root = if pick {
            (-c2 + sq) / two_c3
        } else {
            (-c2 - sq) / two_c3
        };
        vec![root]
    };
    for t in candidates {
        if t.is_zero() {
            continue;
        }
        let coords: Vec<Rat> = base
            .coords()
            .iter()
            .zip(&d)
            .map(|(a, b)| a.clone() + t.clone() * b.clone())
            .collect();
        if let Ok(pt) = ProjectivePoint::new(coords) {
            return Some(pt);
        }
    }
    None
}

/// Residual intersection of X with a random line tangent at `base`: the base
/// counts doubly there, so the third point is always rational.
fn tangent_residual(
    f: &HomogeneousCubic<Rat>,
    p: &crate::forms::TrilinearForm<Rat>,
    base: &ProjectivePoint<Rat>,
    rng: &mut ChaCha8Rng,
) -> Option<ProjectivePoint<Rat>> {
    use rand::Rng;
    let nv = f.num_vars();
    let grad = f.gradient(base.coords()).ok()?;
    let pivot = grad.iter().position(|g| !g.is_zero())?;
    let mut d: Vec<Rat> = (0..nv)
        .map(|_| Rat::from_i64(rng.gen_range(-20..=20)))
        .collect();
    let dot = grad
        .iter()
        .zip(&d)
        .fold(Rat::zero(), |acc, (g, v)| acc + g.clone() * v.clone());
    d[pivot] = d[pivot].clone() - dot / grad[pivot].clone();
    if d.iter().all(|c| c.is_zero()) || proportional(base.coords(), &d) {
        return None;
    }
    // F(base + t d) = 3 P(base,d,d) t^2 + F(d) t^3: the residual root.
    let c2 = p.eval(base.coords(), &d, &d).ok()?;
    let c3 = f.evaluate(&d).ok()?;
    if c2.is_zero() || c3.is_zero() {
        return None;
    }
    let t = -(Rat::from_i64(3) * c2) / c3;
    let coords: Vec<Rat> = base
        .coords()
        .iter()
        .zip(&d)
        .map(|(a, b)| a.clone() + t.clone() * b.clone())
        .collect();
    let pt = ProjectivePoint::new(coords).ok()?;
    if proj_equal(&pt, base, 0.0).ok()? {
        return None;
    }
    Some(pt)
}

/// Seeded random rational point of X from a known rational base point.
/// Secant lines through the base only give a rational residual when a
/// discriminant happens to be square, so after a few secant draws the search
/// switches to chains of tangent-line residuals, which are always rational;
/// two hops leave the tangent hyperplane section of the base point.
pub fn random_point_on_cubic_rational(
    f: &HomogeneousCubic<Rat>,
    base: &ProjectivePoint<Rat>,
    seed: u64,
    retries: usize,
) -> Result<ProjectivePoint<Rat>> {
    if !f.evaluate(base.coords())?.is_zero() {
        return Err(Error::NotOnHypersurface("rational base point".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = f.polarize();
    for attempt in 0..retries.max(1) {
        if attempt < 4 {
            if let Some(pt) = secant_residual(f, &p, base, &mut rng) {
                debug_assert!(f.evaluate(pt.coords()).unwrap().is_zero());
                return Ok(pt);
            }
            continue;
        }
        let Some(first) = tangent_residual(f, &p, base, &mut rng) else {
            continue;
        };
        let Some(second) = tangent_residual(f, &p, &first, &mut rng) else {
            continue;
        };
        debug_assert!(f.evaluate(second.coords()).unwrap().is_zero());
        if proj_equal(&second, base, 0.0)? {
            continue;
        }
        return Ok(second);
    }
    Err(Error::ResampleLimit("random rational point on cubic".into()))
}

/// Spanning set of a random dim-dimensional projective subspace through `x`:
/// x plus dim random points, of full rank dim+1, deterministic per seed.
pub fn random_subspace_through<K: Scalar>(
    x: &ProjectivePoint<K>,
    dim: usize,
    seed: u64,
) -> Result<Vec<ProjectivePoint<K>>> {
    let nv = x.num_vars();
    if dim < 1 || dim > nv - 1 {
        return Err(Error::Parse(format!(
            "subspace dimension {dim} out of range 1..={}",
            nv - 1
        )));
    }
    for attempt in 0..32u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, attempt));
        let mut pts = vec![x.clone()];
        for _ in 0..dim {
            let coords: Vec<K> = (0..nv).map(|_| K::sample_int(&mut rng, 7)).collect();
            if let Ok(p) = ProjectivePoint::new(coords) {
                pts.push(p);
            }
        }
        if pts.len() != dim + 1 {
            continue;
        }
        let rows: Vec<Vec<K>> = pts.iter().map(|p| p.coords().to_vec()).collect();
        if span_rank(&rows, 1e-8).rank == dim + 1 {
            return Ok(pts);
        }
    }
    Err(Error::ResampleLimit("random subspace through point".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use rand_chacha::ChaCha8Rng;

    fn rpt(vals: &[i64]) -> ProjectivePoint<Rat> {
        ProjectivePoint::from_ints(vals)
    }

    #[test]
    fn canonical_representatives() {
        let p = rpt(&[0, 2, 4]);
        assert_eq!(p.coords()[1], Rat::one());
        assert_eq!(p.coords()[2], Rat::from_i64(2));
        let q: ProjectivePoint<Cx> =
            ProjectivePoint::new(vec![Cx::new(1.0, 0.0), Cx::new(0.0, -4.0), Cx::new(2.0, 0.0)])
                .unwrap();
        // Largest modulus coordinate becomes exactly 1.
        assert_eq!(q.coords()[1], Cx::new(1.0, 0.0));
    }

    #[test]
    fn zero_vector_rejected() {
        assert!(matches!(
            ProjectivePoint::<Rat>::new(vec![Rat::zero(); 4]),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn proj_equal_examples() {
        let tol = 1e-10;
        assert!(proj_equal(&rpt(&[1, 2, 3]), &rpt(&[2, 4, 6]), tol).unwrap());
        assert!(!proj_equal(&rpt(&[1, 0, 0]), &rpt(&[0, 1, 0]), tol).unwrap());
        let a: ProjectivePoint<Cx> =
            ProjectivePoint::new(vec![Cx::new(1.0, 0.0), Cx::new(1.0, 0.0), Cx::new(0.0, 0.0)])
                .unwrap();
        let b: ProjectivePoint<Cx> = ProjectivePoint::new(vec![
            Cx::new(1.0, 0.0),
            Cx::new(1.0 + 1e-14, 0.0),
            Cx::new(0.0, 0.0),
        ])
        .unwrap();
        assert!(proj_equal(&a, &b, 1e-10).unwrap());
    }

    #[test]
    fn proj_equal_is_equivalence_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let coords: Vec<Rat> = (0..5).map(|_| Rat::sample_int(&mut rng, 9)).collect();
            let Ok(p) = ProjectivePoint::new(coords) else {
                continue;
            };
            assert!(proj_equal(&p, &p, 1e-10).unwrap());
            let scaled = ProjectivePoint::new(
                p.coords().iter().map(|c| c.clone() * Rat::from_i64(-7)).collect(),
            )
            .unwrap();
            assert!(proj_equal(&p, &scaled, 1e-10).unwrap());
            assert!(proj_equal(&scaled, &p, 1e-10).unwrap());
        }
    }

    #[test]
    fn span_rank_examples() {
        let e: Vec<Vec<Rat>> = (0..4)
            .map(|i| {
                (0..5)
                    .map(|j| if i == j { Rat::one() } else { Rat::zero() })
                    .collect()
            })
            .collect();
        assert_eq!(span_rank(&e, 1e-8).rank, 4);

        let v: Vec<Rat> = [1, -2, 3, 0, 5].iter().map(|&x| Rat::from_i64(x)).collect();
        let multiples: Vec<Vec<Rat>> = (1..=3)
            .map(|m| v.iter().map(|c| c.clone() * Rat::from_i64(m)).collect())
            .collect();
        assert_eq!(span_rank(&multiples, 1e-8).rank, 1);
    }

    #[test]
    fn span_rank_three_vectors_plus_sums() {
        // Independent oracle: plain rational RREF on the same rows.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let vs: Vec<Vec<Rat>> = (0..3)
                .map(|_| (0..5).map(|_| Rat::sample_int(&mut rng, 9)).collect())
                .collect();
            let mut rows = vs.clone();
            for i in 0..3 {
                for j in (i + 1)..3 {
                    rows.push(
                        vs[i]
                            .iter()
                            .zip(&vs[j])
                            .map(|(a, b)| a.clone() + b.clone())
                            .collect(),
                    );
                }
            }
            let mut oracle_rows = rows.clone();
            let (oracle_rank, _) = crate::linalg::rational_rref(&mut oracle_rows);
            let got = span_rank(&rows, 1e-8).rank;
            assert_eq!(got, oracle_rank);
            if oracle_rank == 3 {
                // The generic case the example pins down.
                assert_eq!(got, 3);
            }
        }
    }

    #[test]
    fn span_rank_invariant_under_scaling_and_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            let rows: Vec<Vec<Rat>> = (0..4)
                .map(|_| (0..5).map(|_| Rat::sample_int(&mut rng, 5)).collect())
                .collect();
            if rows.iter().any(|r| r.iter().all(|c| c.is_zero())) {
                continue;
            }
            let base = span_rank(&rows, 1e-8).rank;
            let mut scaled: Vec<Vec<Rat>> = rows
                .iter()
                .map(|r| r.iter().map(|c| c.clone() * Rat::from_i64(3)).collect())
                .collect();
            scaled.reverse();
            assert_eq!(span_rank(&scaled, 1e-8).rank, base);
        }
    }

    #[test]
    fn line_through_examples() {
        let p = rpt(&[1, 0, 0, 0, 0]);
        let q = rpt(&[0, 1, 0, 0, 0]);
        let l = line_through(&p, &q, 1e-10).unwrap();
        assert!(l.contains(&rpt(&[3, -2, 0, 0, 0]), 1e-10));
        assert!(!l.contains(&rpt(&[0, 0, 1, 0, 0]), 1e-10));
        assert!(matches!(
            line_through(&p, &rpt(&[2, 0, 0, 0, 0]), 1e-10),
            Err(Error::CoincidentPoints)
        ));
        // p + q is on the line.
        let sum = rpt(&[1, 1, 0, 0, 0]);
        assert!(l.contains(&sum, 1e-10));
    }

    #[test]
    fn random_complex_point_lies_on_cubic() {
        let f = HomogeneousCubic::<Cx>::fermat(3);
        let p1 = random_point_on_cubic_complex(&f, 42, 1e-10).unwrap();
        let p2 = random_point_on_cubic_complex(&f, 42, 1e-10).unwrap();
        assert!(proj_equal(&p1, &p2, 1e-12).unwrap());
        let val = f.evaluate(p1.coords()).unwrap();
        assert!(val.norm() < 1e-10);
    }

    #[test]
    fn random_rational_point_exact_membership() {
        let f = HomogeneousCubic::<Rat>::fermat(3);
        let base = rpt(&[3, 4, 5, -6, 0]);
        let p = random_point_on_cubic_rational(&f, &base, 7, 64).unwrap();
        assert!(f.evaluate(p.coords()).unwrap().is_zero());
        let q = random_point_on_cubic_rational(&f, &base, 7, 64).unwrap();
        assert!(proj_equal(&p, &q, 0.0).unwrap());
        // Oracle: deflating the sampled line restriction at the base point
        // must reproduce the same residual root, i.e. the point is genuinely
        // the third intersection. Checked implicitly by exact membership plus
        // the point differing from the base.
        assert!(!proj_equal(&p, &base, 0.0).unwrap());
    }

    #[test]
    fn random_subspace_full_rank_and_deterministic() {
        let x = rpt(&[1, 2, 0, -1, 3]);
        let pts = random_subspace_through(&x, 4, 9).unwrap();
        assert_eq!(pts.len(), 5);
        let rows: Vec<Vec<Rat>> = pts.iter().map(|p| p.coords().to_vec()).collect();
        assert_eq!(span_rank(&rows, 1e-8).rank, 5);
        let again = random_subspace_through(&x, 4, 9).unwrap();
        for (a, b) in pts.iter().zip(&again) {
            assert!(proj_equal(a, b, 0.0).unwrap());
        }
        let whole = random_subspace_through(&x, 1, 5).unwrap();
        assert_eq!(whole.len(), 2);
    }

    #[test]
    fn tangent_frame_spans_kernel() {
        let f = HomogeneousCubic::<Rat>::fermat(3);
        let x = rpt(&[3, 4, 5, -6, 0]);
        let g = f.gradient(x.coords()).unwrap();
        let frame = TangentFrame::build(x.clone(), g.clone()).unwrap();
        assert_eq!(frame.dim(), 3);
        for b in &frame.basis {
            let dot = g
                .iter()
                .zip(b)
                .fold(Rat::zero(), |acc, (gi, bi)| acc + gi.clone() * bi.clone());
            assert!(dot.is_zero());
        }
        let mut rows = vec![x.coords().to_vec()];
        rows.extend(frame.basis.iter().cloned());
        assert_eq!(span_rank(&rows, 1e-8).rank, 4);

        // reduce() returns coordinates that lift back to w modulo x.
        let w = frame.basis[0]
            .iter()
            .zip(&frame.basis[2])
            .zip(x.coords())
            .map(|((a, b), xc)| a.clone() - Rat::from_i64(2) * b.clone() + Rat::from_i64(5) * xc.clone())
            .collect::<Vec<_>>();
        let coords = frame.reduce(&w).unwrap();
        let lifted = frame.lift(&coords);
        // w - lifted must be proportional to x.
        let diff: Vec<Rat> = w
            .iter()
            .zip(&lifted)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        assert!(proportional(&diff, x.coords()));
    }
}
