//! Seeded generation of test hypersurfaces: random cubics with small integer
//! coefficients carrying a known rational point, accepted under a point-local
//! smoothness policy, plus an exact construction of cubics containing three
//! prescribed rational lines through a rational point.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forms::{HomogeneousCubic, Mono};
use crate::geom::CubicHypersurface;
use crate::linalg::rational_nullspace;
use crate::projective::{span_rank, ProjectiveLine, ProjectivePoint};
use crate::scalar::{Cx, Rat, Scalar};
use crate::{derive_seed, Error, Result};

/// A corpus item: an exact cubic together with a rational point on it.
#[derive(Debug, Clone)]
pub struct CorpusCubic {
    pub form: HomogeneousCubic<Rat>,
    pub base_point: ProjectivePoint<Rat>,
}

impl CorpusCubic {
    pub fn surface(&self) -> CubicHypersurface<Rat> {
        CubicHypersurface::new(self.form.clone())
    }

    pub fn surface_complex(&self) -> CubicHypersurface<Cx> {
        CubicHypersurface::new(self.form.to_complex())
    }
}

fn all_monos(num_vars: usize) -> Vec<Mono> {
    let mut out = Vec::new();
    for i in 0..num_vars {
        for j in i..num_vars {
            for k in j..num_vars {
                out.push([i, j, k]);
            }
        }
    }
    out
}

/// Point-local smoothness policy: the gradient must be nonzero at 50 sampled
/// complex points, and for threefolds the line count at 5 of them must be
/// finite. Global smoothness is not certified.
fn passes_smoothness_policy(form: &HomogeneousCubic<Rat>, seed: u64) -> bool {
    let surface = CubicHypersurface::new(form.to_complex());
    let mut sampled = Vec::new();
    for k in 0..50u64 {
        let Ok(p) = surface.random_point(derive_seed(seed, 0x5a + k)) else {
            return false;
        };
        match surface.check_smooth_at(&p) {
            Ok(true) => sampled.push(p),
            _ => return false,
        }
    }
    if form.dim() == 3 {
        for (k, p) in sampled.iter().take(5).enumerate() {
            match surface.lines_through(p, derive_seed(seed, 0x1f + k as u64)) {
                Ok(ls) if !ls.is_infinite() => {}
                _ => return false,
            }
        }
    }
    true
}

/// One random smooth cubic of the given dimension with integer coefficients
/// in [-coeff_bound, coeff_bound], adjusted to pass through a small rational
/// point (the x_0^3 coefficient absorbs the correction).
pub fn gen_smooth_cubic(dim: usize, coeff_bound: i64, seed: u64) -> Result<CorpusCubic> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    let num_vars = dim + 2;
    for attempt in 0..64u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, attempt));
        let mut coords: Vec<i64> = vec![1];
        coords.extend((1..num_vars).map(|_| rng.gen_range(-3..=3i64)));
        let base = ProjectivePoint::<Rat>::from_ints(&coords);
        let mut coeffs: BTreeMap<Mono, Rat> = BTreeMap::new();
        for m in all_monos(num_vars) {
            let c: i64 = rng.gen_range(-coeff_bound..=coeff_bound);
            if c != 0 {
                coeffs.insert(m, Rat::from_i64(c));
            }
        }
        // Solve for the x_0^3 coefficient so the base point lies on X
        // (base_0 = 1, so the correction is -F_rest(base)).
        coeffs.remove(&[0, 0, 0]);
        let Ok(rest) = HomogeneousCubic::new(num_vars, coeffs.clone()) else {
            continue;
        };
        let val = rest.evaluate(base.coords())?;
        if !val.is_zero() {
            coeffs.insert([0, 0, 0], -val);
        }
        let Ok(form) = HomogeneousCubic::new(num_vars, coeffs) else {
            continue;
        };
        debug_assert!(form.evaluate(base.coords())?.is_zero());
        if !passes_smoothness_policy(&form, derive_seed(seed, 0x900 + attempt)) {
            continue;
        }
        return Ok(CorpusCubic {
            form,
            base_point: base,
        });
    }
    Err(Error::RetryLimit(format!(
        "no smooth cubic found for dim {dim}, seed {seed}"
    )))
}

/// Deterministic corpus of `count` smooth cubics.
pub fn gen_corpus(count: usize, dim: usize, coeff_bound: i64, seed: u64) -> Result<Vec<CorpusCubic>> {
    (0..count)
        .map(|i| gen_smooth_cubic(dim, coeff_bound, derive_seed(seed, i as u64)))
        .collect()
}

/// The Fermat threefold as a corpus item with its standard rational point.
pub fn fermat_corpus_item() -> CorpusCubic {
    CorpusCubic {
        form: HomogeneousCubic::fermat(3),
        base_point: ProjectivePoint::from_ints(&[3, 4, 5, -6, 0]),
    }
}

/// A cubic threefold containing three prescribed rational lines through
/// x = e_0 whose directions span the tangent space there: sampled from the
/// exact solution space of the incidence conditions. Returns the surface,
/// the point and the lines.
pub fn rational_lines_cubic(
    seed: u64,
) -> Result<(CorpusCubic, ProjectivePoint<Rat>, Vec<ProjectiveLine<Rat>>)> {
    let num_vars = 5usize;
    let x = ProjectivePoint::<Rat>::from_ints(&[1, 0, 0, 0, 0]);
    let dirs = [
        ProjectivePoint::<Rat>::from_ints(&[0, 1, 0, 0, -1]),
        ProjectivePoint::<Rat>::from_ints(&[0, 0, 1, 0, -1]),
        ProjectivePoint::<Rat>::from_ints(&[0, 0, 0, 1, -1]),
    ];
    let monos = all_monos(num_vars);
    // Linear conditions on the coefficient vector: F(x) = 0 and, per line,
    // grad F(x) . d = 0, the mixed second restriction coefficient = 0 and
    // F(d) = 0. Each condition is linear in the monomial coefficients.
    let mono_form = |m: Mono| -> HomogeneousCubic<Rat> {
        HomogeneousCubic::new(num_vars, [(m, Rat::one())].into_iter().collect()).unwrap()
    };
    let mut constraints: Vec<Vec<Rat>> = Vec::new();
    let eval_row = |f: &dyn Fn(&HomogeneousCubic<Rat>) -> Rat| -> Vec<Rat> {
        monos.iter().map(|&m| f(&mono_form(m))).collect()
    };
    constraints.push(eval_row(&|g| g.evaluate(x.coords()).unwrap()));
    for d in &dirs {
        constraints.push(eval_row(&|g| {
            let p = g.polarize();
            p.eval(x.coords(), x.coords(), d.coords()).unwrap()
        }));
        constraints.push(eval_row(&|g| {
            let p = g.polarize();
            p.eval(x.coords(), d.coords(), d.coords()).unwrap()
        }));
        constraints.push(eval_row(&|g| g.evaluate(d.coords()).unwrap()));
    }
    let nullspace = rational_nullspace(&constraints);
    for attempt in 0..64u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x1234 + attempt));
        let mut coeff_vec = vec![Rat::zero(); monos.len()];
        for basis in &nullspace {
            let w = Rat::from_i64(rng.gen_range(-3..=3i64));
            if w.is_zero() {
                continue;
            }
            for (c, b) in coeff_vec.iter_mut().zip(basis) {
                *c = c.clone() + w.clone() * b.clone();
            }
        }
        let coeffs: BTreeMap<Mono, Rat> = monos
            .iter()
            .cloned()
            .zip(coeff_vec)
            .filter(|(_, c)| !c.is_zero())
            .collect();
        let Ok(form) = HomogeneousCubic::new(num_vars, coeffs) else {
            continue;
        };
        let surface = CubicHypersurface::new(form.clone());
        if !surface.check_smooth_at(&x).unwrap_or(false) {
            continue;
        }
        let lines: Vec<ProjectiveLine<Rat>> = dirs
            .iter()
            .map(|d| ProjectiveLine::new(x.clone(), d.clone()).unwrap())
            .collect();
        if !lines
            .iter()
            .all(|l| surface.line_on_hypersurface(l, 0.0).unwrap_or(false))
        {
            continue;
        }
        // Directions must span the tangent space at x.
        let Ok((_, frame)) = surface.tangent_hyperplane(&x) else {
            continue;
        };
        let rows: Vec<Vec<Rat>> = dirs
            .iter()
            .map(|d| frame.reduce(d.coords()))
            .collect::<Result<_>>()?;
        if span_rank(&rows, 1e-8).rank != 3 {
            continue;
        }
        if !passes_smoothness_policy(&form, derive_seed(seed, 0x4321 + attempt)) {
            continue;
        }
        return Ok((
            CorpusCubic {
                form,
                base_point: x.clone(),
            },
            x,
            lines,
        ));
    }
    Err(Error::RetryLimit("rational-lines cubic construction".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_cubics_are_smooth_with_rational_points() {
        let corpus = gen_corpus(2, 3, 5, 42).unwrap();
        for item in &corpus {
            assert!(item
                .surface()
                .contains(&item.base_point)
                .unwrap());
            assert!(item
                .surface()
                .check_smooth_at(&item.base_point)
                .unwrap());
        }
        // Determinism.
        let again = gen_corpus(2, 3, 5, 42).unwrap();
        assert_eq!(corpus[0].form, again[0].form);
    }

    #[test]
    fn rational_lines_cubic_has_exact_spanning_lines() {
        let (item, x, lines) = rational_lines_cubic(5).unwrap();
        let surface = item.surface();
        assert_eq!(lines.len(), 3);
        for l in &lines {
            assert!(surface.line_on_hypersurface(l, 0.0).unwrap());
            assert!(l.contains(&x, 0.0));
        }
    }
}
