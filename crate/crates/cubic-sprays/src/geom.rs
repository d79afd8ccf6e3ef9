//! Geometry of a smooth cubic hypersurface X in P^{n+1}: membership and
//! tangency predicates, the loci S_u, S*_u and C_u, the third-point
//! involution, intersection divisors with lines, and the lines of X through
//! a point (direct solve for n = 3, random slicing for n >= 4).

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::forms::{HomogeneousCubic, LineRestriction, TrilinearForm};
use crate::linalg::RankResult;
use crate::projective::{
    proj_equal, random_subspace_through, span_rank, ProjectiveLine, ProjectivePoint, TangentFrame,
};
use crate::scalar::{Cx, Scalar};
use crate::solve::{
    conic_cubic_intersect, cubic_roots, PlaneIntersection, RootValue, TernaryForm,
};
use crate::{derive_seed, Error, Result, Tolerances};

/// A cubic hypersurface with its cached polarization.
#[derive(Debug, Clone)]
pub struct CubicHypersurface<K: Scalar> {
    form: HomogeneousCubic<K>,
    polar: TrilinearForm<K>,
    tol: Tolerances,
}

/// The degree-3 divisor a line cuts on X, or the contained-line flag.
#[derive(Debug, Clone)]
pub enum DivisorOnLine<K: Scalar> {
    Contained {
        line: ProjectiveLine<K>,
    },
    Finite {
        line: ProjectiveLine<K>,
        points: Vec<(ProjectivePoint<K>, usize)>,
    },
}

impl<K: Scalar> DivisorOnLine<K> {
    pub fn is_contained(&self) -> bool {
        matches!(self, DivisorOnLine::Contained { .. })
    }

    pub fn points(&self) -> &[(ProjectivePoint<K>, usize)] {
        match self {
            DivisorOnLine::Contained { .. } => &[],
            DivisorOnLine::Finite { points, .. } => points,
        }
    }

    pub fn line(&self) -> &ProjectiveLine<K> {
        match self {
            DivisorOnLine::Contained { line } | DivisorOnLine::Finite { line, .. } => line,
        }
    }

    pub fn total_multiplicity(&self) -> usize {
        self.points().iter().map(|(_, m)| m).sum()
    }

    /// Reduced means three distinct simple points.
    pub fn is_reduced(&self) -> bool {
        let pts = self.points();
        pts.len() == 3 && pts.iter().all(|(_, m)| *m == 1)
    }
}

/// Lines on X through a center point: a finite multiset or the Eckardt flag.
#[derive(Debug, Clone)]
pub enum LineSet<K: Scalar> {
    Finite {
        center: ProjectivePoint<K>,
        lines: Vec<(ProjectiveLine<K>, usize)>,
    },
    Infinite {
        center: ProjectivePoint<K>,
        witness: String,
    },
}

impl<K: Scalar> LineSet<K> {
    pub fn is_infinite(&self) -> bool {
        matches!(self, LineSet::Infinite { .. })
    }

    pub fn lines(&self) -> &[(ProjectiveLine<K>, usize)] {
        match self {
            LineSet::Finite { lines, .. } => lines,
            LineSet::Infinite { .. } => &[],
        }
    }

    pub fn total_multiplicity(&self) -> usize {
        self.lines().iter().map(|(_, m)| m).sum()
    }
}

/// Result of the spanning-line search: n lines through the point whose
/// directions span the tangent space there.
#[derive(Debug, Clone)]
pub struct SpanningLines<K: Scalar> {
    pub lines: Vec<ProjectiveLine<K>>,
    pub rank: RankResult,
}

impl<K: Scalar> CubicHypersurface<K> {
    pub fn new(form: HomogeneousCubic<K>) -> Self {
        let polar = form.polarize();
        CubicHypersurface {
            form,
            polar,
            tol: Tolerances::default(),
        }
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn form(&self) -> &HomogeneousCubic<K> {
        &self.form
    }

    pub fn polar(&self) -> &TrilinearForm<K> {
        &self.polar
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    pub fn num_vars(&self) -> usize {
        self.form.num_vars()
    }

    pub fn to_complex(&self) -> CubicHypersurface<Cx> {
        CubicHypersurface::new(self.form.to_complex()).with_tolerances(self.tol.clone())
    }

    fn membership_scale(&self, p: &ProjectivePoint<K>) -> f64 {
        self.form.max_coeff_mag().max(1.0) * p.max_mag().powi(3)
    }

    pub fn contains(&self, p: &ProjectivePoint<K>) -> Result<bool> {
        let v = self.form.evaluate(p.coords())?;
        Ok(v.nearly_zero(self.tol.membership * self.membership_scale(p)))
    }

    pub fn check_smooth_at(&self, p: &ProjectivePoint<K>) -> Result<bool> {
        if !self.contains(p)? {
            return Err(Error::NotOnHypersurface("check_smooth_at".into()));
        }
        let grad = self.form.gradient(p.coords())?;
        let gmax = grad.iter().map(|g| g.mag()).fold(0.0f64, f64::max);
        let scale = self.form.max_coeff_mag().max(1.0) * p.max_mag().powi(2);
        Ok(gmax > self.tol.membership * scale)
    }

    /// Gradient covector plus a tangent frame at a smooth point of X.
    pub fn tangent_hyperplane(
        &self,
        x: &ProjectivePoint<K>,
    ) -> Result<(Vec<K>, TangentFrame<K>)> {
        if !self.check_smooth_at(x)? {
            return Err(Error::SingularPoint(format!(
                "gradient vanishes at {:?}",
                x.coords()
            )));
        }
        let grad = self.form.gradient(x.coords())?;
        let frame = TangentFrame::build(x.clone(), grad.clone())?;
        Ok((grad, frame))
    }

    /// p in S_u = T_uX ∩ X, i.e. P(p,u,u) = 0. Both points assumed on X.
    pub fn in_s(&self, u: &ProjectivePoint<K>, p: &ProjectivePoint<K>) -> Result<bool> {
        let v = self.polar.eval(p.coords(), u.coords(), u.coords())?;
        let scale = self.polar.eval_scale(p.coords(), u.coords(), u.coords());
        Ok(v.nearly_zero(self.tol.membership * scale))
    }

    /// p in S*_u = {x in X : u in T_xX}, i.e. P(p,p,u) = 0.
    pub fn in_s_star(&self, u: &ProjectivePoint<K>, p: &ProjectivePoint<K>) -> Result<bool> {
        let v = self.polar.eval(p.coords(), p.coords(), u.coords())?;
        let scale = self.polar.eval_scale(p.coords(), p.coords(), u.coords());
        Ok(v.nearly_zero(self.tol.membership * scale))
    }

    /// p in C_u: the line through u and p lies on X (u itself included by
    /// convention). For points of X this is equivalent to in_s && in_s_star;
    /// both routes are computed and compared.
    pub fn in_c(&self, u: &ProjectivePoint<K>, p: &ProjectivePoint<K>) -> Result<bool> {
        if proj_equal(u, p, self.tol.membership)? {
            return Ok(true);
        }
        let r = LineRestriction::compute(&self.form, &self.polar, u.coords(), p.coords())?;
        let su = self.membership_scale(u);
        let sp = self.membership_scale(p);
        let s1 = self.polar.eval_scale(u.coords(), u.coords(), p.coords()) * 3.0;
        let s2 = self.polar.eval_scale(u.coords(), p.coords(), p.coords()) * 3.0;
        let t = self.tol.membership;
        let all_vanish = r.c0.nearly_zero(t * su)
            && r.c1.nearly_zero(t * s1)
            && r.c2.nearly_zero(t * s2)
            && r.c3.nearly_zero(t * sp);
        // The predicate pair tests the same two polarization values that c1
        // and c2 are built from, so the routes must agree on points of X.
        debug_assert_eq!(
            all_vanish,
            self.in_s(u, p)? && self.in_s_star(u, p)? && self.contains(p)? && self.contains(u)?,
            "bitangency equivalence violated"
        );
        Ok(all_vanish)
    }

    /// The third intersection point of the line through u and x with X:
    /// P(x,u,u) x - P(x,x,u) u. Indeterminate exactly on C_u.
    pub fn third_point(
        &self,
        u: &ProjectivePoint<K>,
        x: &ProjectivePoint<K>,
    ) -> Result<ProjectivePoint<K>> {
        if !self.contains(u)? {
            return Err(Error::NotOnHypersurface("u in third_point".into()));
        }
        if !self.contains(x)? {
            return Err(Error::NotOnHypersurface("x in third_point".into()));
        }
        if proj_equal(u, x, self.tol.membership)? {
            return Err(Error::Indeterminate("x = u".into()));
        }
        let a = self.polar.eval(x.coords(), u.coords(), u.coords())?;
        let b = self.polar.eval(x.coords(), x.coords(), u.coords())?;
        let sa = self.polar.eval_scale(x.coords(), u.coords(), u.coords());
        let sb = self.polar.eval_scale(x.coords(), x.coords(), u.coords());
        let t = self.tol.membership;
        if a.nearly_zero(t * sa) && b.nearly_zero(t * sb) {
            return Err(Error::Indeterminate(
                "line through u and x lies on X".into(),
            ));
        }
        let coords: Vec<K> = x
            .coords()
            .iter()
            .zip(u.coords())
            .map(|(xc, uc)| a.clone() * xc.clone() - b.clone() * uc.clone())
            .collect();
        let y = ProjectivePoint::new(coords)?;
        debug_assert!(self.contains(&y)?);
        Ok(y)
    }

    /// Intersection multiset of the line through a and b with X.
    pub fn bezout_divisor(
        &self,
        a: &ProjectivePoint<K>,
        b: &ProjectivePoint<K>,
    ) -> Result<DivisorOnLine<K>> {
        let line = ProjectiveLine::new(a.clone(), b.clone())?;
        let r = LineRestriction::compute(&self.form, &self.polar, a.coords(), b.coords())?;
        // Zero decision per coefficient against its own scale, so that a
        // contained line is recognized on the numeric backend too.
        let t = self.tol.membership;
        let scales = [
            self.membership_scale(a),
            self.polar.eval_scale(a.coords(), a.coords(), b.coords()) * 3.0,
            self.polar.eval_scale(a.coords(), b.coords(), b.coords()) * 3.0,
            self.membership_scale(b),
        ];
        let coeffs = r.coeffs();
        if coeffs
            .iter()
            .zip(&scales)
            .all(|(c, s)| c.nearly_zero(t * s))
        {
            return Ok(DivisorOnLine::Contained { line });
        }
        let roots = match cubic_roots(&coeffs, self.tol.cluster_radius) {
            Ok(r) => r,
            Err(Error::IdenticallyZeroOnLine) => {
                return Ok(DivisorOnLine::Contained { line })
            }
            Err(e) => return Err(e),
        };
        let mut points = Vec::new();
        for (val, mult) in &roots.roots {
            let p = match val {
                RootValue::Finite(tv) => line.point_at(tv)?,
                RootValue::Infinity => b.clone(),
            };
            debug_assert!(self.contains(&p)?);
            points.push((p, *mult));
        }
        debug_assert_eq!(points.iter().map(|(_, m)| m).sum::<usize>(), 3);
        Ok(DivisorOnLine::Finite { line, points })
    }

    /// Incidence check: every coefficient of the restriction of F to the line
    /// vanishes (exact, or below `rel_tol` relative to coefficient scale).
    pub fn line_on_hypersurface(&self, line: &ProjectiveLine<K>, rel_tol: f64) -> Result<bool> {
        let a = line.base().coords();
        let b = line.dir().coords();
        let r = LineRestriction::compute(&self.form, &self.polar, a, b)?;
        let scales = [
            self.membership_scale(line.base()),
            self.polar.eval_scale(a, a, b) * 3.0,
            self.polar.eval_scale(a, b, b) * 3.0,
            self.membership_scale(line.dir()),
        ];
        Ok(r.coeffs()
            .iter()
            .zip(&scales)
            .all(|(c, s)| c.nearly_zero(rel_tol * s)))
    }

    /// Worst relative residual among the four incidence coefficients.
    pub fn line_incidence_residual(&self, line: &ProjectiveLine<K>) -> Result<f64> {
        let a = line.base().coords();
        let b = line.dir().coords();
        let r = LineRestriction::compute(&self.form, &self.polar, a, b)?;
        let scales = [
            self.membership_scale(line.base()),
            self.polar.eval_scale(a, a, b) * 3.0,
            self.polar.eval_scale(a, b, b) * 3.0,
            self.membership_scale(line.dir()),
        ];
        Ok(r.coeffs()
            .iter()
            .zip(&scales)
            .map(|(c, s)| c.mag() / s)
            .fold(0.0f64, f64::max))
    }
}

impl CubicHypersurface<Cx> {
    /// All lines of X through x for a cubic threefold (n = 3): solve
    /// P(x,x,v) = 0, P(x,v,v) = 0, F(v) = 0 for directions v modulo x by
    /// parameterizing the tangent hyperplane and intersecting the restricted
    /// conic with the restricted cubic. Infinitely many solutions mean x is
    /// an Eckardt point.
    pub fn lines_through(&self, x: &ProjectivePoint<Cx>, seed: u64) -> Result<LineSet<Cx>> {
        if self.dim() != 3 {
            return Err(Error::UseSpanningLines);
        }
        if !self.check_smooth_at(x)? {
            return Err(Error::SingularPoint("lines_through center".into()));
        }
        let (_, frame) = self.tangent_hyperplane(x)?;
        let mut last_err = String::new();
        for attempt in 0..4u64 {
            let basis = if attempt == 0 {
                frame.basis.clone()
            } else {
                remix_basis(&frame.basis, derive_seed(seed, attempt))
            };
            match self.lines_through_with_basis(x, &basis, derive_seed(seed, 0x11 + attempt)) {
                Ok(ls) => return Ok(ls),
                Err(Error::EckardtCenter) => unreachable!("mapped to LineSet::Infinite"),
                Err(e) => last_err = e.to_string(),
            }
        }
        Err(Error::SolverDegeneracy(format!(
            "lines_through failed after basis retries: {last_err}"
        )))
    }

    fn lines_through_with_basis(
        &self,
        x: &ProjectivePoint<Cx>,
        basis: &[Vec<Cx>],
        seed: u64,
    ) -> Result<LineSet<Cx>> {
        let p = &self.polar;
        let xs = x.coords();
        // Restricted conic Q(s) = P(x, v(s), v(s)) and cubic C(s) = F(v(s))
        // for v(s) = s0 w0 + s1 w1 + s2 w2.
        let mut qc = BTreeMap::new();
        for i in 0..3 {
            for j in i..3 {
                let val = p.eval(xs, &basis[i], &basis[j])?;
                let coeff = if i == j {
                    val
                } else {
                    Cx::from_i64(2) * val
                };
                let mut e = [0usize; 3];
                e[i] += 1;
                e[j] += 1;
                qc.insert(e, coeff);
            }
        }
        let q = TernaryForm::new(2, qc)?;
        let mut cc = BTreeMap::new();
        for i in 0..3 {
            for j in i..3 {
                for k in j..3 {
                    let val = p.eval(&basis[i], &basis[j], &basis[k])?;
                    let count = if i == j && j == k {
                        1
                    } else if i == j || j == k {
                        3
                    } else {
                        6
                    };
                    let mut e = [0usize; 3];
                    e[i] += 1;
                    e[j] += 1;
                    e[k] += 1;
                    cc.insert(e, Cx::from_i64(count) * val);
                }
            }
        }
        let c = TernaryForm::new(3, cc)?;

        // A vanishing restricted conic means every tangent direction solves
        // the quadric condition: the Eckardt cone situation.
        let basis_mag = basis
            .iter()
            .flat_map(|b| b.iter().map(|v| v.mag()))
            .fold(0.0f64, f64::max);
        let q_scale = self.polar.max_entry_mag().max(1.0) * x.max_mag() * basis_mag * basis_mag * 10.0;
        if q.max_mag() <= 1e-8 * q_scale {
            return Ok(LineSet::Infinite {
                center: x.clone(),
                witness: "restricted conic vanishes identically".into(),
            });
        }
        match conic_cubic_intersect(&q, &c, seed, self.tol.cluster_radius)? {
            PlaneIntersection::Infinite { witness } => Ok(LineSet::Infinite {
                center: x.clone(),
                witness,
            }),
            PlaneIntersection::Finite(sols) => {
                let mut lines = Vec::new();
                for (s, mult) in sols {
                    let sc = s.coords();
                    let mut dir = vec![Cx::new(0.0, 0.0); self.num_vars()];
                    for (si, b) in sc.iter().zip(basis) {
                        for (d, bv) in dir.iter_mut().zip(b) {
                            *d += si * bv;
                        }
                    }
                    let dir_pt = ProjectivePoint::new(dir)?;
                    let line = ProjectiveLine::new(x.clone(), dir_pt)?;
                    if !self.line_on_hypersurface(&line, 1e-6)? {
                        return Err(Error::SolverDegeneracy(
                            "candidate line fails incidence".into(),
                        ));
                    }
                    lines.push((line, mult));
                }
                debug_assert_eq!(lines.iter().map(|(_, m)| m).sum::<usize>(), 6);
                Ok(LineSet::Finite {
                    center: x.clone(),
                    lines,
                })
            }
        }
    }

    pub fn is_eckardt(&self, x: &ProjectivePoint<Cx>, seed: u64) -> Result<bool> {
        Ok(self.lines_through(x, seed)?.is_infinite())
    }

    /// n lines on X through x whose tangent directions span T_xX. For n = 3
    /// the six lines are found directly; for n >= 4, random 4-dimensional
    /// subspace slices through x are cut until the gathered directions span.
    pub fn spanning_lines(
        &self,
        x: &ProjectivePoint<Cx>,
        seed: u64,
    ) -> Result<SpanningLines<Cx>> {
        let n = self.dim();
        if !self.check_smooth_at(x)? {
            return Err(Error::SingularPoint("spanning_lines center".into()));
        }
        let (_, frame) = self.tangent_hyperplane(x)?;
        let mut chosen: Vec<ProjectiveLine<Cx>> = Vec::new();
        let mut rows: Vec<Vec<Cx>> = Vec::new();

        let consider = |line: ProjectiveLine<Cx>,
                            chosen: &mut Vec<ProjectiveLine<Cx>>,
                            rows: &mut Vec<Vec<Cx>>|
         -> Result<bool> {
            let reduced = frame.reduce(line.dir().coords())?;
            let mut trial = rows.clone();
            trial.push(reduced.clone());
            if span_rank(&trial, self.tol.rank).rank > rows.len() {
                rows.push(reduced);
                chosen.push(line);
            }
            Ok(rows.len() == n)
        };

        if n == 3 {
            match self.lines_through(x, derive_seed(seed, 1))? {
                LineSet::Infinite { .. } => return Err(Error::EckardtCenter),
                LineSet::Finite { lines, .. } => {
                    for (line, _) in lines {
                        if consider(line, &mut chosen, &mut rows)? {
                            break;
                        }
                    }
                }
            }
        } else {
            'slices: for slice in 0..16u64 {
                let pts = random_subspace_through(x, 4, derive_seed(seed, 0x51 + slice))?;
                let Some(sliced) = self.slice_cubic(&pts)? else {
                    continue;
                };
                let e0 = ProjectivePoint::<Cx>::from_ints(
                    &std::iter::once(1)
                        .chain(std::iter::repeat(0).take(4))
                        .collect::<Vec<i64>>(),
                );
                if !sliced.contains(&e0)? || !sliced.check_smooth_at(&e0).unwrap_or(false) {
                    continue;
                }
                let found = match sliced.lines_through(&e0, derive_seed(seed, 0x91 + slice)) {
                    Ok(LineSet::Finite { lines, .. }) => lines,
                    Ok(LineSet::Infinite { .. }) => continue,
                    Err(_) => continue,
                };
                for (line, _) in found {
                    // Map the slice-coordinates direction back to ambient.
                    let sc = line.dir().coords();
                    let mut dir = vec![Cx::new(0.0, 0.0); self.num_vars()];
                    for (si, b) in sc.iter().zip(&pts) {
                        for (d, bv) in dir.iter_mut().zip(b.coords()) {
                            *d += si * bv;
                        }
                    }
                    let Ok(dir_pt) = ProjectivePoint::new(dir) else {
                        continue;
                    };
                    let Ok(ambient) = ProjectiveLine::new(x.clone(), dir_pt) else {
                        continue;
                    };
                    if !self.line_on_hypersurface(&ambient, 1e-6)? {
                        continue;
                    }
                    if consider(ambient, &mut chosen, &mut rows)? {
                        break 'slices;
                    }
                }
            }
        }
        if rows.is_empty() {
            return Err(Error::RetryLimit(
                "no usable lines found; the center may carry infinitely many lines".into(),
            ));
        }
        let rank = span_rank(&rows, self.tol.rank);
        if rank.rank != n {
            return Err(Error::RetryLimit(format!(
                "spanning lines reached rank {} of {n}",
                rank.rank
            )));
        }
        Ok(SpanningLines {
            lines: chosen,
            rank,
        })
    }

    /// Restrict F to the span of the given 5 points; None when the slice
    /// degenerates to the zero form.
    fn slice_cubic(
        &self,
        pts: &[ProjectivePoint<Cx>],
    ) -> Result<Option<CubicHypersurface<Cx>>> {
        let p = &self.polar;
        let mut coeffs = BTreeMap::new();
        for i in 0..pts.len() {
            for j in i..pts.len() {
                for k in j..pts.len() {
                    let val = p.eval(pts[i].coords(), pts[j].coords(), pts[k].coords())?;
                    let count = if i == j && j == k {
                        1
                    } else if i == j || j == k {
                        3
                    } else {
                        6
                    };
                    let c = Cx::from_i64(count) * val;
                    if c.norm() > 0.0 {
                        coeffs.insert([i, j, k], c);
                    }
                }
            }
        }
        match HomogeneousCubic::new(pts.len(), coeffs) {
            Ok(f) => Ok(Some(
                CubicHypersurface::new(f).with_tolerances(self.tol.clone()),
            )),
            Err(Error::ZeroForm) => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn random_point(&self, seed: u64) -> Result<ProjectivePoint<Cx>> {
        crate::projective::random_point_on_cubic_complex(&self.form, seed, self.tol.membership)
    }
}

fn remix_basis(basis: &[Vec<Cx>], seed: u64) -> Vec<Vec<Cx>> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = basis.len();
    loop {
        let m: Vec<Vec<Cx>> = (0..k)
            .map(|_| {
                (0..k)
                    .map(|_| Cx::new(rng.gen_range(-2..=2) as f64, rng.gen_range(-2..=2) as f64))
                    .collect()
            })
            .collect();
        let out: Vec<Vec<Cx>> = (0..k)
            .map(|i| {
                let mut row = vec![Cx::new(0.0, 0.0); basis[0].len()];
                for j in 0..k {
                    for (r, b) in row.iter_mut().zip(&basis[j]) {
                        *r += m[i][j] * b;
                    }
                }
                row
            })
            .collect();
        if span_rank(&out, 1e-8).rank == k {
            return out;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::random_point_on_cubic_rational;
    use crate::scalar::Rat;
    use num_traits::{One, Zero};

    fn fermat_rat() -> CubicHypersurface<Rat> {
        CubicHypersurface::new(HomogeneousCubic::fermat(3))
    }

    fn fermat_cx() -> CubicHypersurface<Cx> {
        CubicHypersurface::new(HomogeneousCubic::fermat(3))
    }

    fn rpt(v: &[i64]) -> ProjectivePoint<Rat> {
        ProjectivePoint::from_ints(v)
    }

    #[test]
    fn contains_and_smooth() {
        let x = fermat_rat();
        assert!(x.contains(&rpt(&[3, 4, 5, -6, 0])).unwrap());
        assert!(!x.contains(&rpt(&[1, 0, 0, 0, 0])).unwrap());
        assert!(x.check_smooth_at(&rpt(&[3, 4, 5, -6, 0])).unwrap());
        // Scaling invariance of membership.
        assert!(x.contains(&rpt(&[6, 8, 10, -12, 0])).unwrap());
    }

    #[test]
    fn cone_is_singular_at_vertex() {
        // x0^3 + x1^3 + x2^3 in P^4 is singular where x0 = x1 = x2 = 0.
        let mut coeffs = BTreeMap::new();
        for i in 0..3 {
            coeffs.insert([i, i, i], Rat::one());
        }
        let cone = CubicHypersurface::new(HomogeneousCubic::new(5, coeffs).unwrap());
        let vertex = rpt(&[0, 0, 0, 1, 0]);
        assert!(cone.contains(&vertex).unwrap());
        assert!(!cone.check_smooth_at(&vertex).unwrap());
    }

    #[test]
    fn tangent_hyperplane_fermat() {
        let x = fermat_rat();
        let p = rpt(&[3, 4, 5, -6, 0]);
        let (cov, frame) = x.tangent_hyperplane(&p).unwrap();
        // Gradient 3*(9,16,25,36,0); the covector is the unscaled gradient.
        let expected = [27, 48, 75, 108, 0];
        let lead = cov[0].clone() / Rat::from_i64(expected[0]);
        for (c, e) in cov.iter().zip(expected) {
            assert_eq!(c.clone(), lead.clone() * Rat::from_i64(e));
        }
        for b in &frame.basis {
            let dot = cov
                .iter()
                .zip(b)
                .fold(Rat::zero(), |acc, (g, w)| acc + g.clone() * w.clone());
            assert!(dot.is_zero());
        }
        assert_eq!(frame.dim(), 3);
    }

    #[test]
    fn s_and_s_star_examples() {
        let x = fermat_rat();
        let u = rpt(&[1, -1, 0, 0, 0]);
        let p_in = rpt(&[0, 0, 1, -1, 0]);
        let p_out = rpt(&[1, 0, -1, 0, 0]);
        assert!(x.in_s(&u, &u).unwrap());
        assert!(x.in_s(&u, &p_in).unwrap());
        assert!(!x.in_s(&u, &p_out).unwrap());
        assert!(x.in_s_star(&u, &u).unwrap());
        assert!(x.in_s_star(&u, &p_in).unwrap());
        assert!(!x.in_s_star(&u, &p_out).unwrap());
    }

    #[test]
    fn in_c_examples() {
        let x = fermat_rat();
        let u = rpt(&[1, -1, 0, 0, 0]);
        assert!(x.in_c(&u, &rpt(&[0, 0, 1, -1, 0])).unwrap());
        assert!(!x.in_c(&u, &rpt(&[1, 0, -1, 0, 0])).unwrap());
        assert!(x.in_c(&u, &u).unwrap());
    }

    #[test]
    fn third_point_example_and_membership() {
        let x = fermat_rat();
        let u = rpt(&[1, -1, 0, 0, 0]);
        let p = rpt(&[1, 0, -1, 0, 0]);
        let y = x.third_point(&u, &p).unwrap();
        assert!(proj_equal(&y, &rpt(&[0, 1, -1, 0, 0]), 0.0).unwrap());
        assert!(x.contains(&y).unwrap());

        // Indeterminate on a line of X.
        let on_line = rpt(&[0, 0, 1, -1, 0]);
        assert!(matches!(
            x.third_point(&u, &on_line),
            Err(Error::Indeterminate(_))
        ));

        // Fixed point on S*_u \ C_u: the formula reduces to P(x,u,u) x.
        // (0:0:1:-1:0) is in C_u, so build a fixed point differently: any
        // p with P(p,p,u) = 0 but P(p,u,u) != 0 works; verified in the
        // fixed-point suite over sampled data.
    }

    #[test]
    fn involution_on_seeded_rational_points() {
        let x = fermat_rat();
        let base = rpt(&[3, 4, 5, -6, 0]);
        let mut done = 0;
        let mut seed = 0u64;
        while done < 40 {
            seed += 1;
            let Ok(u) = random_point_on_cubic_rational(x.form(), &base, derive_seed(7, seed), 64)
            else {
                continue;
            };
            let Ok(p) =
                random_point_on_cubic_rational(x.form(), &base, derive_seed(8, seed), 64)
            else {
                continue;
            };
            if proj_equal(&u, &p, 0.0).unwrap() || x.in_s(&u, &p).unwrap() {
                continue;
            }
            let y = x.third_point(&u, &p).unwrap();
            assert!(!x.in_s(&u, &y).unwrap(), "image stays off S_u");
            let back = x.third_point(&u, &y).unwrap();
            assert!(proj_equal(&back, &p, 0.0).unwrap());
            done += 1;
        }
    }

    #[test]
    fn bezout_divisor_example() {
        let x = fermat_rat();
        let a = rpt(&[1, 0, -1, 0, 0]);
        let b = rpt(&[1, -1, 0, 0, 0]);
        let d = x.bezout_divisor(&a, &b).unwrap();
        assert!(d.is_reduced());
        let expect = rpt(&[0, 1, -1, 0, 0]);
        let mut found = 0;
        for (p, m) in d.points() {
            assert_eq!(*m, 1);
            if proj_equal(p, &a, 0.0).unwrap()
                || proj_equal(p, &b, 0.0).unwrap()
                || proj_equal(p, &expect, 0.0).unwrap()
            {
                found += 1;
            }
        }
        assert_eq!(found, 3);
    }

    #[test]
    fn bezout_divisor_contained_line() {
        let x = fermat_rat();
        let a = rpt(&[1, -1, 0, 0, 0]);
        let b = rpt(&[0, 0, 1, -1, 0]);
        // The line a + t b = (1:-1:t:-t:0) lies on X.
        let d = x.bezout_divisor(&a, &b).unwrap();
        assert!(d.is_contained());
    }

    #[test]
    fn bezout_divisor_off_surface_point() {
        // The three intersection points are irrational here, so this runs on
        // the complex backend.
        let x = fermat_cx();
        let a = ProjectivePoint::<Cx>::from_ints(&[3, 4, 5, -6, 0]);
        let b = ProjectivePoint::<Cx>::from_ints(&[1, 0, 0, 0, 0]); // not on X
        let d = x.bezout_divisor(&a, &b).unwrap();
        assert_eq!(d.total_multiplicity(), 3);
        for (p, _) in d.points() {
            assert!(!proj_equal(p, &b, 1e-9).unwrap());
        }
    }

    #[test]
    fn bezout_divisor_irrational_over_rationals() {
        let x = fermat_rat();
        let a = rpt(&[3, 4, 5, -6, 0]);
        let b = rpt(&[1, 0, 0, 0, 0]);
        assert!(matches!(
            x.bezout_divisor(&a, &b),
            Err(Error::IrrationalRoots)
        ));
    }

    #[test]
    fn lines_through_general_point_has_six() {
        let x = fermat_cx();
        let p = ProjectivePoint::<Cx>::from_ints(&[3, 4, 5, -6, 0]);
        let ls = x.lines_through(&p, 21).unwrap();
        assert!(!ls.is_infinite());
        assert_eq!(ls.total_multiplicity(), 6);
        assert_eq!(ls.lines().len(), 6, "general point has 6 distinct lines");
        for (line, _) in ls.lines() {
            assert!(x.line_incidence_residual(line).unwrap() < 1e-9);
            assert!(line.contains(&p, 1e-8));
            // in_C holds for the second generator.
            assert!(x.in_c(&p, line.dir()).unwrap());
        }
    }

    #[test]
    fn lines_through_eckardt_point_infinite() {
        let x = fermat_cx();
        let p = ProjectivePoint::<Cx>::from_ints(&[1, -1, 0, 0, 0]);
        let ls = x.lines_through(&p, 5).unwrap();
        assert!(ls.is_infinite());
        assert!(x.is_eckardt(&p, 5).unwrap());
        let q = ProjectivePoint::<Cx>::from_ints(&[1, 0, -1, 0, 0]);
        assert!(x.is_eckardt(&q, 6).unwrap());
        let general = ProjectivePoint::<Cx>::from_ints(&[3, 4, 5, -6, 0]);
        assert!(!x.is_eckardt(&general, 7).unwrap());
    }

    #[test]
    fn spanning_lines_threefold() {
        let x = fermat_cx();
        let p = ProjectivePoint::<Cx>::from_ints(&[3, 4, 5, -6, 0]);
        let sl = x.spanning_lines(&p, 31).unwrap();
        assert_eq!(sl.lines.len(), 3);
        assert_eq!(sl.rank.rank, 3);
        for line in &sl.lines {
            assert!(x.line_on_hypersurface(line, 1e-8).unwrap());
        }
    }

    #[test]
    fn spanning_lines_eckardt_errors() {
        let x = fermat_cx();
        let p = ProjectivePoint::<Cx>::from_ints(&[1, -1, 0, 0, 0]);
        assert!(matches!(
            x.spanning_lines(&p, 1),
            Err(Error::EckardtCenter)
        ));
    }

    #[test]
    fn spanning_lines_fourfold() {
        let x: CubicHypersurface<Cx> = CubicHypersurface::new(HomogeneousCubic::fermat(4));
        let p = x.random_point(77).unwrap();
        let sl = x.spanning_lines(&p, 13).unwrap();
        assert_eq!(sl.lines.len(), 4);
        assert_eq!(sl.rank.rank, 4);
        for line in &sl.lines {
            assert!(x.line_on_hypersurface(line, 1e-6).unwrap());
            assert!(line.contains(&p, 1e-8));
        }
    }

    #[test]
    fn lines_through_requires_threefold() {
        let x: CubicHypersurface<Cx> = CubicHypersurface::new(HomogeneousCubic::fermat(4));
        let p = x.random_point(3).unwrap();
        assert!(matches!(
            x.lines_through(&p, 1),
            Err(Error::UseSpanningLines)
        ));
    }
}
