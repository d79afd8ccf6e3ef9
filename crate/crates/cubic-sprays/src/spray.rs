//! Rank-1 spray data at a target point y of X and the local-ellipticity
//! (domination) certificate: a setup line through y meeting X in the reduced
//! divisor {x, u, y}, n lines on X through x with spanning directions, the
//! orbit tangents their third-point images trace at y, and full-rank
//! evidence for the tangent matrix.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::geom::{CubicHypersurface, DivisorOnLine, SpanningLines};
use crate::linalg::{RankEvidence, RankResult};
use crate::projective::{
    canonical_cmp, proj_equal, span_rank, ProjectiveLine, ProjectivePoint, TangentFrame,
};
use crate::scalar::{Cx, Rat, Scalar};
use crate::{derive_seed, Error, Result};

/// Genericity flags of a setup: all must hold for the spray construction to
/// go through (x, y off S_u ∪ S*_u and u, y off S_x ∪ S*_x).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenericityFlags {
    pub x_in_u_u: bool,
    pub y_in_u_u: bool,
    pub u_in_u_x: bool,
    pub y_in_u_x: bool,
}

impl GenericityFlags {
    pub fn all(&self) -> bool {
        self.x_in_u_u && self.y_in_u_u && self.u_in_u_x && self.y_in_u_x
    }
}

/// Setup at y: auxiliary points x, u with the line through x and y cutting
/// the reduced divisor {x, u, y} on X, plus the genericity flags.
#[derive(Debug, Clone)]
pub struct SpraySetup<K: Scalar> {
    pub y: ProjectivePoint<K>,
    pub x: ProjectivePoint<K>,
    pub u: ProjectivePoint<K>,
    pub divisor: DivisorOnLine<K>,
    pub flags: GenericityFlags,
}

/// One rank-1 spray orbit: a line l on X through x, the point z where l meets
/// the tangent hyperplane at u, and the orbit tangent at y in frame
/// coordinates.
#[derive(Debug, Clone)]
pub struct OrbitDatum<K: Scalar> {
    pub line: ProjectiveLine<K>,
    pub z: ProjectivePoint<K>,
    pub tangent: Vec<K>,
}

/// The full local-ellipticity witness at y.
#[derive(Debug, Clone)]
pub struct SprayCertificate<K: Scalar> {
    pub setup: SpraySetup<K>,
    pub orbits: Vec<OrbitDatum<K>>,
    pub tangent_matrix: Vec<Vec<K>>,
    pub rank: RankResult,
    /// Worst deviation of the orbit tangents from the pushforward of the raw
    /// line directions through the involution differential.
    pub dtau_cross_residual: f64,
    pub seed: u64,
    pub verified: bool,
}

pub fn genericity_flags<K: Scalar>(
    x_surface: &CubicHypersurface<K>,
    y: &ProjectivePoint<K>,
    x: &ProjectivePoint<K>,
    u: &ProjectivePoint<K>,
) -> Result<GenericityFlags> {
    Ok(GenericityFlags {
        x_in_u_u: !x_surface.in_s(u, x)? && !x_surface.in_s_star(u, x)?,
        y_in_u_u: !x_surface.in_s(u, y)? && !x_surface.in_s_star(u, y)?,
        u_in_u_x: !x_surface.in_s(x, u)? && !x_surface.in_s_star(x, u)?,
        y_in_u_x: !x_surface.in_s(x, y)? && !x_surface.in_s_star(x, y)?,
    })
}

/// Draw seeded random lines through y until one cuts a reduced divisor
/// {x, u, y} on X whose genericity flags all pass.
pub fn pick_setup<K: Scalar>(
    surface: &CubicHypersurface<K>,
    y: &ProjectivePoint<K>,
    seed: u64,
) -> Result<SpraySetup<K>> {
    if !surface.check_smooth_at(y)? {
        return Err(Error::SingularPoint("pick_setup target".into()));
    }
    let retries = surface.tolerances().retries.max(1);
    let tol = surface.tolerances().membership;
    for attempt in 0..retries as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, attempt));
        let coords: Vec<K> = (0..surface.num_vars())
            .map(|_| K::sample_int(&mut rng, 20))
            .collect();
        let Ok(q) = ProjectivePoint::new(coords) else {
            continue;
        };
        if proj_equal(y, &q, tol)? {
            continue;
        }
        let Ok(divisor) = surface.bezout_divisor(y, &q) else {
            continue;
        };
        if !divisor.is_reduced() {
            continue;
        }
        // Identify y among the three points; the remaining two become x and
        // u in canonical order (the labels are symmetric).
        let mut others: Vec<ProjectivePoint<K>> = Vec::new();
        let mut saw_y = false;
        for (p, _) in divisor.points() {
            if !saw_y && proj_equal(p, y, tol)? {
                saw_y = true;
            } else {
                others.push(p.clone());
            }
        }
        if !saw_y || others.len() != 2 {
            continue;
        }
        others.sort_by(canonical_cmp);
        let (x, u) = (others[0].clone(), others[1].clone());
        let flags = genericity_flags(surface, y, &x, &u)?;
        if !flags.all() {
            continue;
        }
        // The third point of the line through u and x is y by construction.
        debug_assert!(proj_equal(&surface.third_point(&u, &x)?, y, 1e-7)?);
        return Ok(SpraySetup {
            y: y.clone(),
            x,
            u,
            divisor,
            flags,
        });
    }
    Err(Error::ResampleLimit(format!(
        "pick_setup: no generic reduced divisor through y in {retries} draws"
    )))
}

/// z = l ∩ T_uX for a line l = {x + s d}: the combination
/// P(d,u,u) x - P(x,u,u) d, well-defined whenever x is off T_uX.
pub fn tangent_plane_intercept<K: Scalar>(
    surface: &CubicHypersurface<K>,
    u: &ProjectivePoint<K>,
    line: &ProjectiveLine<K>,
) -> Result<ProjectivePoint<K>> {
    let x = line.base().coords();
    let d = line.dir().coords();
    let a = surface.polar().eval(d, u.coords(), u.coords())?;
    let b = surface.polar().eval(x, u.coords(), u.coords())?;
    let sb = surface.polar().eval_scale(x, u.coords(), u.coords());
    if b.nearly_zero(surface.tolerances().membership * sb) {
        return Err(Error::Indeterminate(
            "line base point lies on the tangent hyperplane at u".into(),
        ));
    }
    let coords: Vec<K> = x
        .iter()
        .zip(d)
        .map(|(xc, dc)| a.clone() * xc.clone() - b.clone() * dc.clone())
        .collect();
    ProjectivePoint::new(coords)
}

/// Orbit parameterization value: tau_u(x + t z), defined for points off C_u.
pub fn orbit_point<K: Scalar>(
    surface: &CubicHypersurface<K>,
    u: &ProjectivePoint<K>,
    x: &ProjectivePoint<K>,
    z: &ProjectivePoint<K>,
    t: &K,
) -> Result<ProjectivePoint<K>> {
    let coords: Vec<K> = x
        .coords()
        .iter()
        .zip(z.coords())
        .map(|(a, b)| a.clone() + t.clone() * b.clone())
        .collect();
    let f_t = ProjectivePoint::new(coords)?;
    surface.third_point(u, &f_t)
}

/// Ambient derivative at t = 0 of tau_u(x + t z):
/// P(z,u,u) x + P(x,u,u) z - 2 P(x,z,u) u.
pub fn orbit_tangent_ambient<K: Scalar>(
    surface: &CubicHypersurface<K>,
    u: &ProjectivePoint<K>,
    x: &ProjectivePoint<K>,
    z: &ProjectivePoint<K>,
) -> Result<Vec<K>> {
    let p = surface.polar();
    let a = p.eval(z.coords(), u.coords(), u.coords())?;
    let b = p.eval(x.coords(), u.coords(), u.coords())?;
    let c = p.eval(x.coords(), z.coords(), u.coords())?;
    let two = K::from_i64(2);
    Ok((0..surface.num_vars())
        .map(|i| {
            a.clone() * x.coords()[i].clone() + b.clone() * z.coords()[i].clone()
                - two.clone() * c.clone() * u.coords()[i].clone()
        })
        .collect())
}

/// Orbit tangent reduced into the tangent frame at y. Errors when the
/// reduction is (numerically) zero, which signals a degenerate setup.
pub fn orbit_tangent<K: Scalar>(
    surface: &CubicHypersurface<K>,
    u: &ProjectivePoint<K>,
    x: &ProjectivePoint<K>,
    z: &ProjectivePoint<K>,
    y_frame: &TangentFrame<K>,
) -> Result<Vec<K>> {
    let ambient = orbit_tangent_ambient(surface, u, x, z)?;
    let reduced = y_frame.reduce(&ambient)?;
    let ambient_scale = ambient.iter().map(|v| v.mag()).fold(0.0f64, f64::max);
    let reduced_scale = reduced.iter().map(|v| v.mag()).fold(0.0f64, f64::max);
    let zero = if K::EXACT {
        reduced.iter().all(|v| v.is_zero())
    } else {
        reduced_scale <= 1e-12 * ambient_scale.max(1e-300)
    };
    if zero {
        return Err(Error::ZeroTangent);
    }
    Ok(reduced)
}

/// Assemble orbits, the tangent matrix and the rank evidence for a given
/// setup and a given family of lines through x. Shared by the numeric
/// pipeline and exact rational certification.
pub fn assemble_certificate<K: Scalar>(
    surface: &CubicHypersurface<K>,
    setup: SpraySetup<K>,
    lines: Vec<ProjectiveLine<K>>,
    seed: u64,
) -> Result<SprayCertificate<K>> {
    let n = surface.dim();
    let grad = surface.form().gradient(setup.y.coords())?;
    let frame = TangentFrame::build(setup.y.clone(), grad)?;
    let mut orbits = Vec::with_capacity(lines.len());
    let mut rows = Vec::with_capacity(lines.len());
    let mut cross_residual = 0.0f64;
    for line in lines {
        let z = tangent_plane_intercept(surface, &setup.u, &line)?;
        if proj_equal(&z, line.base(), surface.tolerances().membership)? {
            return Err(Error::SolverDegeneracy("z coincides with x".into()));
        }
        let tangent = orbit_tangent(surface, &setup.u, &setup.x, &z, &frame)?;
        // Cross-check: pushing the raw line direction through the involution
        // differential gives the same tangent direction modulo y.
        let via_dir = orbit_tangent_ambient(surface, &setup.u, &setup.x, line.dir())
            .and_then(|amb| frame.reduce(&amb))?;
        cross_residual = cross_residual.max(direction_mismatch(&tangent, &via_dir));
        rows.push(tangent.clone());
        orbits.push(OrbitDatum { line, z, tangent });
    }
    let rank = span_rank(&rows, surface.tolerances().rank);
    if rank.rank != n {
        let evidence = match &rank.evidence {
            RankEvidence::SingularValues(sv) => format!("singular values {sv:?}"),
            RankEvidence::ExactMinor { minor, .. } => format!("max nonzero minor {minor}"),
        };
        return Err(Error::RankDeficient(format!(
            "tangent matrix rank {} of {n}; {evidence}",
            rank.rank
        )));
    }
    Ok(SprayCertificate {
        setup,
        orbits,
        tangent_matrix: rows,
        rank,
        dtau_cross_residual: cross_residual,
        seed,
        verified: true,
    })
}

/// Relative deviation of two vectors from proportionality.
fn direction_mismatch<K: Scalar>(a: &[K], b: &[K]) -> f64 {
    let amax = a.iter().map(|v| v.mag()).fold(0.0f64, f64::max);
    let bmax = b.iter().map(|v| v.mag()).fold(0.0f64, f64::max);
    if amax == 0.0 || bmax == 0.0 {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            let minor = a[i].clone() * b[j].clone() - a[j].clone() * b[i].clone();
            worst = worst.max(minor.mag() / (amax * bmax));
        }
    }
    worst
}

/// Build a domination certificate at y on the numeric backend: pick a setup,
/// find spanning lines at its x, take orbit tangents at y, and certify
/// full rank. Rank-deficient attempts are retried a few times and then
/// surfaced as counterexample candidates, never dropped.
pub fn build_certificate(
    surface: &CubicHypersurface<Cx>,
    y: &ProjectivePoint<Cx>,
    seed: u64,
) -> Result<SprayCertificate<Cx>> {
    if !surface.check_smooth_at(y)? {
        return Err(Error::SingularPoint("build_certificate target".into()));
    }
    let mut rank_failures: Vec<String> = Vec::new();
    let mut last_err: Option<Error> = None;
    for attempt in 0..8u64 {
        let setup = match pick_setup(surface, y, derive_seed(seed, 0xa0 + attempt)) {
            Ok(s) => s,
            Err(e @ Error::ResampleLimit(_)) => return Err(e),
            Err(e) => return Err(e),
        };
        let SpanningLines { lines, .. } =
            match surface.spanning_lines(&setup.x, derive_seed(seed, 0xb0 + attempt)) {
                Ok(sl) => sl,
                Err(Error::EckardtCenter) | Err(Error::RetryLimit(_)) => {
                    last_err = Some(Error::RetryLimit(format!(
                        "spanning lines unavailable at setup attempt {attempt}"
                    )));
                    continue;
                }
                Err(e) => return Err(e),
            };
        match assemble_certificate(surface, setup, lines, seed) {
            Ok(cert) => return Ok(cert),
            Err(Error::RankDeficient(detail)) => {
                rank_failures.push(detail);
                continue;
            }
            Err(Error::ZeroTangent) | Err(Error::SolverDegeneracy(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if !rank_failures.is_empty() {
        return Err(Error::RankDeficient(format!(
            "all retries rank-deficient: [{}]",
            rank_failures.join("; ")
        )));
    }
    Err(last_err.unwrap_or_else(|| {
        Error::ResampleLimit("build_certificate retries exhausted".into())
    }))
}

/// Outcome of re-verifying a certificate from scratch.
#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub ok: bool,
    pub reasons: Vec<String>,
}

/// Recompute every membership, incidence and rank claim of the certificate.
pub fn verify_certificate<K: Scalar>(
    surface: &CubicHypersurface<K>,
    cert: &SprayCertificate<K>,
) -> VerifyOutcome {
    let mut reasons = Vec::new();
    let tol = surface.tolerances().membership;
    let check = |ok: bool, reason: &str, reasons: &mut Vec<String>| {
        if !ok {
            reasons.push(reason.to_string());
        }
    };

    let on_x = |p: &ProjectivePoint<K>| surface.contains(p).unwrap_or(false);
    check(on_x(&cert.setup.y), "y not on X", &mut reasons);
    check(on_x(&cert.setup.x), "x not on X", &mut reasons);
    check(on_x(&cert.setup.u), "u not on X", &mut reasons);
    check(
        surface.check_smooth_at(&cert.setup.y).unwrap_or(false),
        "y not a smooth point",
        &mut reasons,
    );
    if !reasons.is_empty() {
        return VerifyOutcome { ok: false, reasons };
    }

    // Divisor: the line through x and y must cut exactly {x, u, y}, reduced.
    match surface.bezout_divisor(&cert.setup.x, &cert.setup.y) {
        Ok(div) if div.is_reduced() => {
            let mut matched = 0;
            for target in [&cert.setup.x, &cert.setup.u, &cert.setup.y] {
                if div
                    .points()
                    .iter()
                    .any(|(p, _)| proj_equal(p, target, 1e-7).unwrap_or(false))
                {
                    matched += 1;
                }
            }
            check(matched == 3, "divisor is not {x, u, y}", &mut reasons);
        }
        _ => reasons.push("divisor not reduced".into()),
    }

    match genericity_flags(surface, &cert.setup.y, &cert.setup.x, &cert.setup.u) {
        Ok(flags) => check(flags.all(), "genericity flags fail", &mut reasons),
        Err(_) => reasons.push("genericity flags unavailable".into()),
    }

    match surface.third_point(&cert.setup.u, &cert.setup.x) {
        Ok(y2) => check(
            proj_equal(&y2, &cert.setup.y, 1e-7).unwrap_or(false),
            "third point of (u, x) is not y",
            &mut reasons,
        ),
        Err(_) => reasons.push("third point of (u, x) undefined".into()),
    }

    let n = surface.dim();
    check(
        cert.orbits.len() == n,
        &format!("expected {n} orbits, found {}", cert.orbits.len()),
        &mut reasons,
    );

    let frame = surface
        .form()
        .gradient(cert.setup.y.coords())
        .ok()
        .and_then(|g| TangentFrame::build(cert.setup.y.clone(), g).ok());
    let Some(frame) = frame else {
        reasons.push("tangent frame at y unavailable".into());
        return VerifyOutcome { ok: false, reasons };
    };

    for (idx, orbit) in cert.orbits.iter().enumerate() {
        let tag = format!("orbit {idx}");
        check(
            surface
                .line_on_hypersurface(&orbit.line, 1e-6)
                .unwrap_or(false),
            &format!("{tag}: line incidence"),
            &mut reasons,
        );
        check(
            orbit.line.contains(&cert.setup.x, 1e-7),
            &format!("{tag}: line misses x"),
            &mut reasons,
        );
        check(
            orbit.line.contains(&orbit.z, 1e-7),
            &format!("{tag}: z off the line"),
            &mut reasons,
        );
        check(
            !proj_equal(&orbit.z, &cert.setup.x, tol).unwrap_or(true),
            &format!("{tag}: z equals x"),
            &mut reasons,
        );
        // z on the tangent hyperplane at u.
        if let Ok(g) = surface.form().gradient(cert.setup.u.coords()) {
            let dot = g
                .iter()
                .zip(orbit.z.coords())
                .fold(K::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
            let scale = surface.form().max_coeff_mag().max(1.0)
                * cert.setup.u.max_mag().powi(2)
                * orbit.z.max_mag()
                * surface.num_vars() as f64;
            check(
                dot.nearly_zero(1e-7 * scale),
                &format!("{tag}: z off the tangent hyperplane at u"),
                &mut reasons,
            );
        }
        // Tangent recomputation.
        match orbit_tangent(surface, &cert.setup.u, &cert.setup.x, &orbit.z, &frame) {
            Ok(recomputed) => {
                let close = if K::EXACT {
                    recomputed == orbit.tangent
                } else {
                    let scale = recomputed
                        .iter()
                        .chain(orbit.tangent.iter())
                        .map(|v| v.mag())
                        .fold(0.0f64, f64::max)
                        .max(1e-300);
                    recomputed
                        .iter()
                        .zip(&orbit.tangent)
                        .all(|(a, b)| (a.clone() - b.clone()).mag() <= 1e-7 * scale)
                };
                check(close, &format!("{tag}: stored tangent mismatch"), &mut reasons);
            }
            Err(_) => reasons.push(format!("{tag}: tangent recomputation failed")),
        }
        // Matrix row agrees with the orbit tangent.
        if idx < cert.tangent_matrix.len() {
            check(
                cert.tangent_matrix[idx] == orbit.tangent,
                &format!("{tag}: matrix row differs from orbit tangent"),
                &mut reasons,
            );
        }
    }

    let rank = span_rank(&cert.tangent_matrix, surface.tolerances().rank);
    check(
        rank.rank == n,
        &format!("tangent matrix rank {} of {n}", rank.rank),
        &mut reasons,
    );

    VerifyOutcome {
        ok: reasons.is_empty(),
        reasons,
    }
}

// ---------------------------------------------------------------------------
// Conic orbit verification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConicVerdict {
    Conic,
    Degenerate(String),
}

/// Report of the conic-orbit check: sampled orbit points through a varied
/// third point y', their plane containment and the rank-5 moment matrix.
#[derive(Debug, Clone)]
pub struct ConicReport<K: Scalar> {
    pub u: ProjectivePoint<K>,
    pub line: ProjectiveLine<K>,
    pub y_prime: ProjectivePoint<K>,
    pub orbit_points: Vec<ProjectivePoint<K>>,
    pub plane_residuals: Vec<f64>,
    pub moment_singular_values: Vec<f64>,
    pub moment_rank: usize,
    pub conic_residual: f64,
    pub verdict: ConicVerdict,
}

/// Check that the orbit through a varied target point y' closes up on a plane
/// conic: the images of the line l under tau_{u'} with u' = tau_x(y') lie in
/// the plane spanned by l and y' and satisfy a single conic there.
pub fn conic_orbit_check<K: Scalar>(
    surface: &CubicHypersurface<K>,
    x: &ProjectivePoint<K>,
    line: &ProjectiveLine<K>,
    y_prime: &ProjectivePoint<K>,
    seed: u64,
    samples: usize,
) -> Result<ConicReport<K>> {
    if samples < 7 {
        return Err(Error::InsufficientSamples {
            needed: 7,
            got: samples,
        });
    }
    if !surface.contains(y_prime)? {
        return Err(Error::NotOnHypersurface("conic check y'".into()));
    }
    if !line.contains(x, surface.tolerances().membership.max(1e-7)) {
        return Err(Error::Parse("line does not pass through x".into()));
    }
    // u' = tau_x(y'); requires y' off C_x.
    let u_prime = surface.third_point(x, y_prime)?;
    let flags = genericity_flags(surface, y_prime, x, &u_prime)?;
    if !flags.all() {
        return Err(Error::SolverDegeneracy(
            "y' fails the genericity flags of the setup family".into(),
        ));
    }
    let z = tangent_plane_intercept(surface, &u_prime, line)?;

    // Sample orbit parameters; t = 0 recovers y' itself.
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x7e57));
    let mut ts: Vec<K> = vec![K::zero()];
    let mut guard = 0;
    while ts.len() < samples && guard < samples * 20 {
        guard += 1;
        let t = K::sample_unit(&mut rng);
        if ts.iter().any(|s| (s.clone() - t.clone()).mag() < 1e-9) {
            continue;
        }
        ts.push(t);
    }
    if ts.len() < samples {
        return Err(Error::ResampleLimit("conic orbit parameters".into()));
    }
    let mut orbit_points = Vec::with_capacity(samples);
    for t in &ts {
        match orbit_point(surface, &u_prime, x, &z, t) {
            Ok(p) => orbit_points.push(p),
            Err(Error::Indeterminate(_)) => {
                return Err(Error::SolverDegeneracy(
                    "orbit parameter hit the indeterminacy locus".into(),
                ))
            }
            Err(e) => return Err(e),
        }
    }
    debug_assert!(proj_equal(&orbit_points[0], y_prime, 1e-6)?);

    // Plane containment: every image in the span of {x, z, y'}.
    let span_cols = [
        x.coords().to_vec(),
        z.coords().to_vec(),
        y_prime.coords().to_vec(),
    ];
    let mut plane_residuals = Vec::with_capacity(orbit_points.len());
    let mut plane_coords: Vec<[K; 3]> = Vec::with_capacity(orbit_points.len());
    for p in &orbit_points {
        let Some((coeffs, resid)) = crate::linalg::solve_in_span(&span_cols, p.coords()) else {
            return Err(Error::SolverDegeneracy(
                "orbit point not expressible in the plane span".into(),
            ));
        };
        plane_residuals.push(resid);
        plane_coords.push([coeffs[0].clone(), coeffs[1].clone(), coeffs[2].clone()]);
    }
    let plane_ok = plane_residuals.iter().all(|&r| r < 1e-9);

    // Veronese moment matrix of the plane coordinates; rank exactly 5 pins a
    // unique conic through the samples.
    let rows: Vec<Vec<K>> = plane_coords
        .iter()
        .map(|c| {
            let scale = c.iter().map(|v| v.mag()).fold(0.0f64, f64::max).max(1e-300);
            let inv = K::one() / from_mag::<K>(scale);
            let s: Vec<K> = c.iter().map(|v| v.clone() * inv.clone()).collect();
            vec![
                s[0].clone() * s[0].clone(),
                s[0].clone() * s[1].clone(),
                s[0].clone() * s[2].clone(),
                s[1].clone() * s[1].clone(),
                s[1].clone() * s[2].clone(),
                s[2].clone() * s[2].clone(),
            ]
        })
        .collect();
    let (moment_rank, singular_values, conic_residual) = conic_fit::<K>(&rows);
    let rank_ok = moment_rank == 5;
    let fit_ok = conic_residual < 1e-9;

    let verdict = if plane_ok && rank_ok && fit_ok {
        ConicVerdict::Conic
    } else {
        ConicVerdict::Degenerate(format!(
            "plane_ok={plane_ok} rank={moment_rank} fit_residual={conic_residual:.3e}"
        ))
    };
    Ok(ConicReport {
        u: u_prime,
        line: line.clone(),
        y_prime: y_prime.clone(),
        orbit_points,
        plane_residuals,
        moment_singular_values: singular_values,
        moment_rank,
        conic_residual,
        verdict,
    })
}

fn from_mag<K: Scalar>(v: f64) -> K {
    // Structural scaling only; exact backend rounds to a nearby rational.
    if K::EXACT {
        K::one()
    } else {
        K::from_json(&json!([v, 0.0])).unwrap_or_else(|_| K::one())
    }
}

fn conic_fit<K: Scalar>(rows: &[Vec<K>]) -> (usize, Vec<f64>, f64) {
    if K::EXACT {
        let rank = span_rank(rows, 1e-8).rank;
        // Exact case: rank 5 certifies the conic with residual zero by
        // construction (the null vector is exact).
        let resid = if rank == 5 { 0.0 } else { f64::INFINITY };
        (rank, Vec::new(), resid)
    } else {
        let cx_rows: Vec<Vec<Cx>> = rows
            .iter()
            .map(|r| r.iter().map(|v| v.to_complex()).collect())
            .collect();
        let (sv, vecs) = crate::linalg::complex_svd(&cx_rows, true);
        let smax = sv.first().copied().unwrap_or(0.0).max(1e-300);
        let rank = sv.iter().filter(|&&s| s > 1e-8 * smax).count();
        let gap = if sv.len() >= 6 && sv[4] > 0.0 {
            sv[5] / sv[4]
        } else {
            f64::INFINITY
        };
        // Residual of the fitted conic (last right-singular direction).
        let conic = vecs.as_ref().map(|v| v[5].clone());
        let mut resid = gap;
        if let Some(conic) = conic {
            let cnorm = conic.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            for row in &cx_rows {
                let dot: Cx = row.iter().zip(&conic).map(|(a, b)| a * b).sum();
                let rnorm = row.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                resid = resid.max(dot.norm() / (cnorm * rnorm).max(1e-300));
            }
        }
        (rank, sv, resid)
    }
}

// ---------------------------------------------------------------------------
// Certificate JSON
// ---------------------------------------------------------------------------

fn rank_json(rank: &RankResult) -> (Value, Value) {
    match &rank.evidence {
        RankEvidence::ExactMinor { minor, .. } => {
            (Value::String(minor.to_string()), Value::Null)
        }
        RankEvidence::SingularValues(sv) => (
            Value::Null,
            Value::Array(sv.iter().map(|&s| json!(s)).collect()),
        ),
    }
}

impl<K: Scalar> SprayCertificate<K> {
    pub fn to_json(&self, cubic: &crate::forms::HomogeneousCubic<K>) -> Value {
        let (determinant, singular_values) = rank_json(&self.rank);
        json!({
            "cubic": cubic.to_spec_json(),
            "backend": K::backend_name(),
            "seed": self.seed,
            "y": self.setup.y.to_json(),
            "x": self.setup.x.to_json(),
            "u": self.setup.u.to_json(),
            "divisor": self.setup.divisor.points().iter().map(|(p, m)| {
                json!({"point": p.to_json(), "multiplicity": m})
            }).collect::<Vec<_>>(),
            "orbits": self.orbits.iter().map(|o| json!({
                "line": o.line.to_json(),
                "z": o.z.to_json(),
                "tangent": Value::Array(o.tangent.iter().map(|t| t.to_json()).collect()),
            })).collect::<Vec<_>>(),
            "tangent_matrix": self.tangent_matrix.iter().map(|row| {
                Value::Array(row.iter().map(|t| t.to_json()).collect())
            }).collect::<Vec<_>>(),
            "rank": self.rank.rank,
            "determinant": determinant,
            "singular_values": singular_values,
            "dtau_cross_residual": self.dtau_cross_residual,
            "verified": self.verified,
        })
    }

    /// Rebuild a certificate from its JSON form (the cubic is parsed
    /// separately so the caller controls the backend).
    pub fn from_json(doc: &Value, surface: &CubicHypersurface<K>) -> Result<Self> {
        let get = |k: &str| -> Result<&Value> {
            doc.get(k)
                .ok_or_else(|| Error::Parse(format!("certificate missing \"{k}\"")))
        };
        let y = ProjectivePoint::from_json(get("y")?)?;
        let x = ProjectivePoint::from_json(get("x")?)?;
        let u = ProjectivePoint::from_json(get("u")?)?;
        let seed = get("seed")?.as_u64().unwrap_or(0);
        let divisor = surface.bezout_divisor(&x, &y)?;
        let flags = genericity_flags(surface, &y, &x, &u)?;
        let orbits_json = get("orbits")?
            .as_array()
            .ok_or_else(|| Error::Parse("orbits must be an array".into()))?;
        let mut orbits = Vec::new();
        for o in orbits_json {
            let line = ProjectiveLine::from_json(
                o.get("line")
                    .ok_or_else(|| Error::Parse("orbit missing line".into()))?,
            )?;
            let z = ProjectivePoint::from_json(
                o.get("z")
                    .ok_or_else(|| Error::Parse("orbit missing z".into()))?,
            )?;
            let tangent = o
                .get("tangent")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("orbit missing tangent".into()))?
                .iter()
                .map(K::from_json)
                .collect::<Result<Vec<_>>>()?;
            orbits.push(OrbitDatum { line, z, tangent });
        }
        let tangent_matrix = get("tangent_matrix")?
            .as_array()
            .ok_or_else(|| Error::Parse("tangent_matrix must be an array".into()))?
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?
                    .iter()
                    .map(K::from_json)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let rank = span_rank(&tangent_matrix, surface.tolerances().rank);
        let verified = get("verified")?.as_bool().unwrap_or(false);
        let dtau_cross_residual = doc
            .get("dtau_cross_residual")
            .and_then(Value::as_f64)
            .unwrap_or(f64::NAN);
        Ok(SprayCertificate {
            setup: SpraySetup {
                y,
                x,
                u,
                divisor,
                flags,
            },
            orbits,
            tangent_matrix,
            rank,
            dtau_cross_residual,
            seed,
            verified,
        })
    }
}

/// Exact determinant of the tangent matrix for rational certificates.
pub fn exact_determinant(cert: &SprayCertificate<Rat>) -> Rat {
    crate::linalg::rational_det(&cert.tangent_matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::HomogeneousCubic;

    fn fermat_cx() -> CubicHypersurface<Cx> {
        CubicHypersurface::new(HomogeneousCubic::fermat(3))
    }

    fn cpt(v: &[i64]) -> ProjectivePoint<Cx> {
        ProjectivePoint::from_ints(v)
    }

    #[test]
    fn pick_setup_deterministic_and_flagged() {
        let x = fermat_cx();
        let y = cpt(&[0, 1, -1, 0, 0]);
        let s1 = pick_setup(&x, &y, 1).unwrap();
        let s2 = pick_setup(&x, &y, 1).unwrap();
        assert!(proj_equal(&s1.x, &s2.x, 1e-12).unwrap());
        assert!(proj_equal(&s1.u, &s2.u, 1e-12).unwrap());
        assert!(s1.flags.all());
        assert!(s1.divisor.is_reduced());
        // tau_u(x) = y.
        let y2 = x.third_point(&s1.u, &s1.x).unwrap();
        assert!(proj_equal(&y2, &y, 1e-8).unwrap());
    }

    #[test]
    fn pick_setup_at_eckardt_target_still_works() {
        // The setup itself needs no line count at y.
        let x = fermat_cx();
        let y = cpt(&[1, -1, 0, 0, 0]);
        let s = pick_setup(&x, &y, 3).unwrap();
        assert!(s.flags.all());
    }

    #[test]
    fn orbit_points_stay_on_surface() {
        let surface = fermat_cx();
        let y = surface.random_point(100).unwrap();
        let cert = build_certificate(&surface, &y, 17).unwrap();
        let orbit = &cert.orbits[0];
        for k in 0..5i64 {
            let t = Cx::new(0.3 + 0.2 * k as f64, 0.1 * k as f64);
            let p = orbit_point(&surface, &cert.setup.u, &cert.setup.x, &orbit.z, &t).unwrap();
            assert!(surface.contains(&p).unwrap());
        }
        // t = 0 maps to y.
        let p0 = orbit_point(
            &surface,
            &cert.setup.u,
            &cert.setup.x,
            &orbit.z,
            &Cx::new(0.0, 0.0),
        )
        .unwrap();
        assert!(proj_equal(&p0, &cert.setup.y, 1e-7).unwrap());
    }

    #[test]
    fn tangent_matches_finite_differences() {
        let surface = fermat_cx();
        let y = surface.random_point(200).unwrap();
        let cert = build_certificate(&surface, &y, 23).unwrap();
        let orbit = &cert.orbits[0];
        let u = &cert.setup.u;
        let x = &cert.setup.x;
        let ambient = orbit_tangent_ambient(&surface, u, x, &orbit.z).unwrap();

        // Chart derivative at y against central finite differences of the
        // canonically normalized orbit.
        let h = 1e-5;
        let yhat: Vec<Cx> = {
            let p = surface.polar();
            let a = p.eval(x.coords(), u.coords(), u.coords()).unwrap();
            let b = p.eval(x.coords(), x.coords(), u.coords()).unwrap();
            x.coords()
                .iter()
                .zip(u.coords())
                .map(|(xc, uc)| a * xc - b * uc)
                .collect()
        };
        let j = Cx::canonical_pivot(&yhat).unwrap();
        let chart = |p: &ProjectivePoint<Cx>| -> Vec<Cx> {
            let pj = p.coords()[j];
            p.coords().iter().map(|c| c / pj).collect()
        };
        let plus = orbit_point(&surface, u, x, &orbit.z, &Cx::new(h, 0.0)).unwrap();
        let minus = orbit_point(&surface, u, x, &orbit.z, &Cx::new(-h, 0.0)).unwrap();
        let fd: Vec<Cx> = chart(&plus)
            .iter()
            .zip(chart(&minus))
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect();
        // Symbolic chart derivative: (w - (w_j / yhat_j) yhat) / yhat_j.
        let wj = ambient[j];
        let sym: Vec<Cx> = ambient
            .iter()
            .zip(&yhat)
            .map(|(w, yc)| (w - (wj / yhat[j]) * yc) / yhat[j])
            .collect();
        let scale = sym.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        for (a, b) in fd.iter().zip(&sym) {
            assert!((a - b).norm() < 1e-6 * scale.max(1.0));
        }
    }

    #[test]
    fn scaling_z_scales_tangent() {
        let surface = fermat_cx();
        let y = surface.random_point(300).unwrap();
        let cert = build_certificate(&surface, &y, 29).unwrap();
        let orbit = &cert.orbits[0];
        let lambda = Cx::new(2.5, -1.0);
        let z_scaled = ProjectivePoint::new(
            orbit.z.coords().iter().map(|c| c * lambda).collect::<Vec<_>>(),
        )
        .unwrap();
        // Canonicalization removes the scale, so compare ambient formulas on
        // raw coordinate vectors instead.
        let p = surface.polar();
        let u = &cert.setup.u;
        let x = &cert.setup.x;
        let raw: Vec<Cx> = orbit.z.coords().to_vec();
        let scaled: Vec<Cx> = raw.iter().map(|c| c * lambda).collect();
        let amb = |zc: &[Cx]| -> Vec<Cx> {
            let a = p.eval(zc, u.coords(), u.coords()).unwrap();
            let b = p.eval(x.coords(), u.coords(), u.coords()).unwrap();
            let c = p.eval(x.coords(), zc, u.coords()).unwrap();
            (0..5)
                .map(|i| a * x.coords()[i] + b * zc[i] - 2.0 * c * u.coords()[i])
                .collect()
        };
        let t1 = amb(&raw);
        let t2 = amb(&scaled);
        for (a, b) in t1.iter().zip(&t2) {
            assert!((b - a * lambda).norm() < 1e-9 * (1.0 + a.norm()) * lambda.norm());
        }
        let _ = z_scaled;
    }

    #[test]
    fn certificate_round_trip_and_tamper() {
        let surface = fermat_cx();
        let y = surface.random_point(400).unwrap();
        let cert = build_certificate(&surface, &y, 31).unwrap();
        assert_eq!(cert.rank.rank, 3);
        let out = verify_certificate(&surface, &cert);
        assert!(out.ok, "reasons: {:?}", out.reasons);

        // JSON round trip preserves verification.
        let doc = cert.to_json(surface.form());
        let back = SprayCertificate::from_json(&doc, &surface).unwrap();
        assert!(verify_certificate(&surface, &back).ok);

        // Tamper: zero out one tangent row.
        let mut bad = cert.clone();
        bad.tangent_matrix[0] = vec![Cx::new(0.0, 0.0); 3];
        bad.orbits[0].tangent = bad.tangent_matrix[0].clone();
        let out = verify_certificate(&surface, &bad);
        assert!(!out.ok);

        // Tamper: replace u by a point off X.
        let mut bad = cert.clone();
        bad.setup.u = cpt(&[1, 0, 0, 0, 0]);
        let out = verify_certificate(&surface, &bad);
        assert!(!out.ok);
        assert!(out.reasons.iter().any(|r| r.contains("u not on X")));

        // Tamper: swap a line for a chord not on X.
        let mut bad = cert;
        let chord = ProjectiveLine::new(bad.setup.x.clone(), cpt(&[1, 0, 0, 0, 1])).unwrap();
        bad.orbits[0].line = chord;
        let out = verify_certificate(&surface, &bad);
        assert!(!out.ok);
        assert!(out.reasons.iter().any(|r| r.contains("line incidence")));
    }

    #[test]
    fn conic_orbit_check_on_fermat() {
        let surface = fermat_cx();
        let y = surface.random_point(500).unwrap();
        let cert = build_certificate(&surface, &y, 37).unwrap();
        let line = &cert.orbits[0].line;
        let x = &cert.setup.x;
        // Sample y' = tau_x(u') for a fresh random u' with valid flags.
        let mut report = None;
        for k in 0..20u64 {
            let Ok(u2) = surface.random_point(derive_seed(600, k)) else {
                continue;
            };
            let Ok(y2) = surface.third_point(x, &u2) else {
                continue;
            };
            match conic_orbit_check(&surface, x, line, &y2, derive_seed(601, k), 9) {
                Ok(r) => {
                    report = Some(r);
                    break;
                }
                Err(_) => continue,
            }
        }
        let report = report.expect("a generic y' validates");
        assert_eq!(report.verdict, ConicVerdict::Conic);
        assert_eq!(report.moment_rank, 5);
        assert!(report.conic_residual < 1e-9);
        assert!(report.plane_residuals.iter().all(|&r| r < 1e-9));
        assert_eq!(report.orbit_points.len(), 9);
        for p in &report.orbit_points {
            assert!(surface.contains(p).unwrap());
        }
    }

    #[test]
    fn conic_orbit_check_needs_seven_samples() {
        let surface = fermat_cx();
        let y = surface.random_point(700).unwrap();
        let cert = build_certificate(&surface, &y, 41).unwrap();
        let err = conic_orbit_check(
            &surface,
            &cert.setup.x,
            &cert.orbits[0].line,
            &cert.setup.y,
            1,
            5,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InsufficientSamples { needed: 7, got: 5 }));
    }
}
