//! Projector contract, analytic projector zoo, and checkers for the
//! sufficient conditions that make fixed points meaningful minimizers.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::rng::Rng;
use crate::vecmath;

/// A (possibly approximate) projector onto a set of images.
///
/// Applications are pure: same input, same output. Idempotence is an intent,
/// not a guarantee; [`check_idempotence`] measures it.
pub trait Projector {
    fn apply(&self, x: &Image) -> Image;
    /// Human-readable description of the target set.
    fn descriptor(&self) -> String;
}

/// Closed convex sets with closed-form orthogonal projections.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ConvexSetSpec {
    /// Axis-aligned box with per-component bounds.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Euclidean ball.
    L2Ball { center: Vec<f64>, radius: f64 },
    /// offset + span(basis), basis rows orthonormal.
    AffineSubspace {
        basis: Vec<Vec<f64>>,
        offset: Vec<f64>,
    },
    /// Finite point set; the orthogonal projection returns the nearest
    /// member (lowest index on ties). Convex only when it is a singleton.
    PointSet { points: Vec<Vec<f64>> },
}

impl ConvexSetSpec {
    /// Box with the same scalar bounds in every component.
    pub fn uniform_box(lo: f64, hi: f64, dim: usize) -> Self {
        ConvexSetSpec::Box {
            lo: vec![lo; dim],
            hi: vec![hi; dim],
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            ConvexSetSpec::Box { lo, hi } => {
                if lo.len() != dim || hi.len() != dim {
                    return Err(Error::Config(format!(
                        "box bounds must have dimension {dim}"
                    )));
                }
                for (l, h) in lo.iter().zip(hi) {
                    if !(l.is_finite() && h.is_finite() && l <= h) {
                        return Err(Error::Config(format!("box bound {l} > {h}")));
                    }
                }
            }
            ConvexSetSpec::L2Ball { center, radius } => {
                if center.len() != dim {
                    return Err(Error::Config(format!("ball center must have dimension {dim}")));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::Config(format!("ball radius {radius} must be positive")));
                }
            }
            ConvexSetSpec::AffineSubspace { basis, offset } => {
                if offset.len() != dim {
                    return Err(Error::Config(format!("offset must have dimension {dim}")));
                }
                for b in basis {
                    if b.len() != dim {
                        return Err(Error::Config(format!(
                            "basis vectors must have dimension {dim}"
                        )));
                    }
                }
                for i in 0..basis.len() {
                    for j in i..basis.len() {
                        let g = vecmath::dot(&basis[i], &basis[j]);
                        let expect = if i == j { 1.0 } else { 0.0 };
                        if (g - expect).abs() > 1e-8 {
                            return Err(Error::Config(format!(
                                "basis is not orthonormal: <b{i}, b{j}> = {g}"
                            )));
                        }
                    }
                }
            }
            ConvexSetSpec::PointSet { points } => {
                if points.is_empty() {
                    return Err(Error::Config("point set must be nonempty".into()));
                }
                for p in points {
                    if p.len() != dim {
                        return Err(Error::Config(format!("points must have dimension {dim}")));
                    }
                    if !vecmath::all_finite(p) {
                        return Err(Error::Config("points must be finite".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Nearest point of the set in l2, written into `out`.
    pub fn project_flat(&self, x: &[f64], out: &mut [f64]) {
        match self {
            ConvexSetSpec::Box { lo, hi } => {
                for i in 0..x.len() {
                    out[i] = x[i].clamp(lo[i], hi[i]);
                }
            }
            ConvexSetSpec::L2Ball { center, radius } => {
                let d = vecmath::dist2(x, center);
                if d <= *radius {
                    out.copy_from_slice(x);
                } else {
                    let s = radius / d;
                    for i in 0..x.len() {
                        out[i] = center[i] + s * (x[i] - center[i]);
                    }
                }
            }
            ConvexSetSpec::AffineSubspace { basis, offset } => {
                out.copy_from_slice(offset);
                for b in basis {
                    let mut c = 0.0;
                    for i in 0..x.len() {
                        c += (x[i] - offset[i]) * b[i];
                    }
                    vecmath::axpy(c, b, out);
                }
            }
            ConvexSetSpec::PointSet { points } => {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (i, p) in points.iter().enumerate() {
                    let d = vecmath::dist2(x, p);
                    if d < best_d {
                        best_d = d;
                        best = i;
                    }
                }
                out.copy_from_slice(&points[best]);
            }
        }
    }

    /// Smallest pairwise distance between points (point sets only).
    pub fn min_point_gap(&self) -> Option<f64> {
        if let ConvexSetSpec::PointSet { points } = self {
            let mut gap = f64::INFINITY;
            for i in 0..points.len() {
                for j in i + 1..points.len() {
                    gap = gap.min(vecmath::dist2(&points[i], &points[j]));
                }
            }
            if gap.is_finite() {
                return Some(gap);
            }
        }
        None
    }
}

/// Orthogonal projection onto a convex set; the unique nearest point.
pub fn project_convex(spec: &ConvexSetSpec, x: &Image) -> Result<Image> {
    spec.validate(x.len())?;
    let mut out = x.same_shape_zeros();
    spec.project_flat(&x.pixels, &mut out.pixels);
    Ok(out)
}

/// Projection onto a finite union: every member is projected and the nearest
/// result wins, ties broken by the lowest member index.
pub fn project_union(members: &[ConvexSetSpec], x: &Image) -> Result<Image> {
    if members.is_empty() {
        return Err(Error::Config("union requires at least one member".into()));
    }
    for m in members {
        m.validate(x.len())?;
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut cand = vec![0.0; x.len()];
    for m in members {
        m.project_flat(&x.pixels, &mut cand);
        let d = vecmath::dist2(&cand, &x.pixels);
        let better = match &best {
            Some((bd, _)) => d < *bd,
            None => true,
        };
        if better {
            best = Some((d, cand.clone()));
        }
    }
    let (_, pixels) = best.expect("nonempty members");
    Ok(x.with_pixels(pixels))
}

/// Validated orthogonal projector onto a single convex set.
#[derive(Debug, Clone)]
pub struct ConvexProjector {
    spec: ConvexSetSpec,
}

impl ConvexProjector {
    pub fn new(spec: ConvexSetSpec, dim: usize) -> Result<Self> {
        spec.validate(dim)?;
        Ok(ConvexProjector { spec })
    }

    pub fn spec(&self) -> &ConvexSetSpec {
        &self.spec
    }
}

impl Projector for ConvexProjector {
    fn apply(&self, x: &Image) -> Image {
        let mut out = x.same_shape_zeros();
        self.spec.project_flat(&x.pixels, &mut out.pixels);
        out
    }

    fn descriptor(&self) -> String {
        match &self.spec {
            ConvexSetSpec::Box { .. } => "orthogonal projector onto a box".into(),
            ConvexSetSpec::L2Ball { .. } => "orthogonal projector onto an l2 ball".into(),
            ConvexSetSpec::AffineSubspace { basis, .. } => {
                format!("orthogonal projector onto a {}-dim affine subspace", basis.len())
            }
            ConvexSetSpec::PointSet { points } => {
                format!("nearest-point projector onto {} points", points.len())
            }
        }
    }
}

/// Validated orthogonal projector onto a finite union of convex sets.
#[derive(Debug, Clone)]
pub struct UnionProjector {
    members: Vec<ConvexSetSpec>,
}

impl UnionProjector {
    pub fn new(members: Vec<ConvexSetSpec>, dim: usize) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Config("union requires at least one member".into()));
        }
        for m in &members {
            m.validate(dim)?;
        }
        Ok(UnionProjector { members })
    }

    pub fn members(&self) -> &[ConvexSetSpec] {
        &self.members
    }

    /// Smallest distance between distinct point-set members, when all
    /// members are point sets; drives the default epsilon of local checks.
    pub fn min_member_gap(&self) -> Option<f64> {
        let mut all_points: Vec<&Vec<f64>> = Vec::new();
        let mut groups: Vec<(usize, usize)> = Vec::new();
        for m in &self.members {
            if let ConvexSetSpec::PointSet { points } = m {
                let start = all_points.len();
                all_points.extend(points.iter());
                groups.push((start, all_points.len()));
            } else {
                return None;
            }
        }
        let mut gap = f64::INFINITY;
        for (gi, &(s1, e1)) in groups.iter().enumerate() {
            for &(s2, e2) in groups.iter().skip(gi + 1) {
                for p in &all_points[s1..e1] {
                    for q in &all_points[s2..e2] {
                        gap = gap.min(vecmath::dist2(p, q));
                    }
                }
            }
        }
        gap.is_finite().then_some(gap)
    }
}

impl Projector for UnionProjector {
    fn apply(&self, x: &Image) -> Image {
        project_union(&self.members, x).expect("members validated at construction")
    }

    fn descriptor(&self) -> String {
        format!("nearest projection onto a union of {} convex sets", self.members.len())
    }
}

/// The identity map; trivially a projector onto all of R^N.
#[derive(Debug, Clone, Copy)]
pub struct IdentityProjector;

impl Projector for IdentityProjector {
    fn apply(&self, x: &Image) -> Image {
        x.clone()
    }

    fn descriptor(&self) -> String {
        "identity".into()
    }
}

/// x -> factor * x. Not a projector (unless factor = 1); used as a linear
/// L-Lipschitz stand-in when certifying contraction rates.
#[derive(Debug, Clone, Copy)]
pub struct ScalingOperator {
    pub factor: f64,
}

impl Projector for ScalingOperator {
    fn apply(&self, x: &Image) -> Image {
        let mut out = x.clone();
        vecmath::scale(self.factor, &mut out.pixels);
        out
    }

    fn descriptor(&self) -> String {
        format!("scaling by {}", self.factor)
    }
}

/// Deliberately faulty projector: projects, then adds a constant bias, so the
/// output leaves the set and the local condition gains a findable witness.
#[derive(Debug, Clone)]
pub struct BiasedProjector {
    pub spec: ConvexSetSpec,
    pub bias: f64,
}

impl Projector for BiasedProjector {
    fn apply(&self, x: &Image) -> Image {
        let mut out = x.same_shape_zeros();
        self.spec.project_flat(&x.pixels, &mut out.pixels);
        for v in out.pixels.iter_mut() {
            *v += self.bias;
        }
        out
    }

    fn descriptor(&self) -> String {
        format!("biased (+{}) projector", self.bias)
    }
}

/// Adversarial operator: a seed-deterministic but wildly discontinuous map
/// returning a pseudorandom image inside a box, keyed on the input bits.
/// Exercises the convergence guarantee that holds for arbitrary operators.
#[derive(Debug, Clone, Copy)]
pub struct RandomBoxOperator {
    pub lo: f64,
    pub hi: f64,
    pub seed: u64,
}

impl Projector for RandomBoxOperator {
    fn apply(&self, x: &Image) -> Image {
        let mut h = 0xcbf2_9ce4_8422_2325u64 ^ self.seed;
        for &v in &x.pixels {
            h ^= v.to_bits();
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
        let mut rng = Rng::new(h);
        let mut out = x.same_shape_zeros();
        rng.fill_uniform(&mut out.pixels, self.lo, self.hi);
        out
    }

    fn descriptor(&self) -> String {
        format!("seed-random box operator on [{}, {}]", self.lo, self.hi)
    }
}

/// Source of points of the set S for the condition checkers.
pub trait SetSampler {
    /// An arbitrary point of S.
    fn sample(&self, rng: &mut Rng) -> Vec<f64>;
    /// A point of S inside the epsilon-ball around `center`, if one exists
    /// and the sampler can find it.
    fn sample_near(&self, center: &[f64], epsilon: f64, rng: &mut Rng) -> Option<Vec<f64>>;
}

impl SetSampler for ConvexSetSpec {
    fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        match self {
            ConvexSetSpec::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| rng.uniform(*l, *h))
                .collect(),
            ConvexSetSpec::L2Ball { center, radius } => {
                let n = center.len();
                let mut dir = vec![0.0; n];
                rng.fill_normal(&mut dir, 0.0, 1.0);
                let norm = vecmath::norm2(&dir).max(1e-300);
                let r = radius * libm::pow(rng.next_f64(), 1.0 / n as f64);
                center
                    .iter()
                    .zip(&dir)
                    .map(|(c, d)| c + r * d / norm)
                    .collect()
            }
            ConvexSetSpec::AffineSubspace { basis, offset } => {
                let mut p = offset.clone();
                for b in basis {
                    vecmath::axpy(rng.normal(), b, &mut p);
                }
                p
            }
            ConvexSetSpec::PointSet { points } => points[rng.below(points.len())].clone(),
        }
    }

    fn sample_near(&self, center: &[f64], epsilon: f64, rng: &mut Rng) -> Option<Vec<f64>> {
        if let ConvexSetSpec::PointSet { points } = self {
            let near: Vec<&Vec<f64>> = points
                .iter()
                .filter(|p| vecmath::dist2(p, center) <= epsilon)
                .collect();
            if near.is_empty() {
                return None;
            }
            return Some(near[rng.below(near.len())].clone());
        }
        let mut cand = vec![0.0; center.len()];
        let mut perturbed = vec![0.0; center.len()];
        for attempt in 0..32 {
            let sigma = epsilon * 0.5 / (1 << attempt.min(8)) as f64;
            for (p, c) in perturbed.iter_mut().zip(center) {
                *p = c + sigma * rng.normal();
            }
            self.project_flat(&perturbed, &mut cand);
            if vecmath::dist2(&cand, center) <= epsilon {
                return Some(cand.clone());
            }
        }
        self.project_flat(center, &mut cand);
        (vecmath::dist2(&cand, center) <= epsilon).then_some(cand)
    }
}

/// Sampler over a union: a uniformly chosen member is delegated to.
pub struct UnionSampler<'a> {
    pub members: &'a [ConvexSetSpec],
}

impl SetSampler for UnionSampler<'_> {
    fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        self.members[rng.below(self.members.len())].sample(rng)
    }

    fn sample_near(&self, center: &[f64], epsilon: f64, rng: &mut Rng) -> Option<Vec<f64>> {
        let start = rng.below(self.members.len());
        for k in 0..self.members.len() {
            let m = &self.members[(start + k) % self.members.len()];
            if let Some(z) = m.sample_near(center, epsilon, rng) {
                return Some(z);
            }
        }
        None
    }
}

/// Outcome of a sampled condition check. An unsatisfied report carries the
/// witnessing pair (x, z) whose inner product is strictly positive.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub satisfied: bool,
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
    pub samples_tested: usize,
    pub epsilon: f64,
}

/// How the checkers draw the probe points x: half uniform on a box, half
/// Gaussian perturbations around sampled points of S. Violations for
/// non-convex S concentrate near medial axes, which the Gaussian draws hit.
#[derive(Debug, Clone)]
pub struct ConditionCheckConfig {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub box_lo: f64,
    pub box_hi: f64,
    pub gauss_sigma: f64,
}

impl ConditionCheckConfig {
    pub fn for_dim(dim: usize) -> Self {
        ConditionCheckConfig {
            seed: 0xc0ffee,
            width: dim,
            height: 1,
            box_lo: -2.0,
            box_hi: 2.0,
            gauss_sigma: 0.5,
        }
    }
}

fn draw_probe(cfg: &ConditionCheckConfig, sampler: &dyn SetSampler, i: usize, rng: &mut Rng) -> Vec<f64> {
    let dim = cfg.width * cfg.height;
    if i % 2 == 0 {
        let mut x = vec![0.0; dim];
        rng.fill_uniform(&mut x, cfg.box_lo, cfg.box_hi);
        x
    } else {
        let mut x = sampler.sample(rng);
        for v in x.iter_mut() {
            *v += cfg.gauss_sigma * rng.normal();
        }
        x
    }
}

fn inner_slack(a: &[f64], b: &[f64]) -> f64 {
    1e-10 * (1.0 + vecmath::norm2(a) * vecmath::norm2(b))
}

/// Sampled check of the local projector condition: for probes x and set
/// points z within epsilon of P(x), the inner product
/// `<z - P(x), x - P(x)>` must stay nonpositive.
pub fn check_local_condition(
    p: &dyn Projector,
    sampler: &dyn SetSampler,
    epsilon: f64,
    n_samples: usize,
    cfg: &ConditionCheckConfig,
) -> Result<ConditionReport> {
    check_condition(p, sampler, Some(epsilon), n_samples, cfg)
}

/// Sampled check of the global variant, with z drawn from all of S.
pub fn check_global_condition(
    p: &dyn Projector,
    sampler: &dyn SetSampler,
    n_samples: usize,
    cfg: &ConditionCheckConfig,
) -> Result<ConditionReport> {
    check_condition(p, sampler, None, n_samples, cfg)
}

fn check_condition(
    p: &dyn Projector,
    sampler: &dyn SetSampler,
    epsilon: Option<f64>,
    n_samples: usize,
    cfg: &ConditionCheckConfig,
) -> Result<ConditionReport> {
    let mut rng = Rng::new(cfg.seed);
    let mut z_draws = 0usize;
    for i in 0..n_samples {
        let x = draw_probe(cfg, sampler, i, &mut rng);
        let img = Image::from_pixels(cfg.width, cfg.height, 1.0, x.clone())?;
        let px = p.apply(&img);
        let z = match epsilon {
            Some(eps) => match sampler.sample_near(&px.pixels, eps, &mut rng) {
                Some(z) => z,
                None => continue,
            },
            None => sampler.sample(&mut rng),
        };
        z_draws += 1;
        let mut inner = 0.0;
        let mut zc = vec![0.0; x.len()];
        let mut xc = vec![0.0; x.len()];
        for k in 0..x.len() {
            zc[k] = z[k] - px.pixels[k];
            xc[k] = x[k] - px.pixels[k];
            inner += zc[k] * xc[k];
        }
        if inner > inner_slack(&zc, &xc) {
            return Ok(ConditionReport {
                satisfied: false,
                witness: Some((x, z)),
                samples_tested: i + 1,
                epsilon: epsilon.unwrap_or(f64::INFINITY),
            });
        }
    }
    if z_draws == 0 {
        return Err(Error::SamplerFailure(
            "sampler produced no in-ball set points for any probe",
        ));
    }
    Ok(ConditionReport {
        satisfied: true,
        witness: None,
        samples_tested: n_samples,
        epsilon: epsilon.unwrap_or(f64::INFINITY),
    })
}

/// Sampled lower bound on the Lipschitz constant of `p`. Alternates distant
/// pairs (uniform on [-radius, radius]^N) with close pairs, which capture the
/// local slope. Seed-deterministic.
pub fn estimate_lipschitz(
    p: &dyn Projector,
    width: usize,
    height: usize,
    n_pairs: usize,
    radius: f64,
    seed: u64,
) -> f64 {
    let mut rng = Rng::new(seed);
    let dim = width * height;
    let mut best = 0.0f64;
    for i in 0..n_pairs {
        let mut x = vec![0.0; dim];
        rng.fill_uniform(&mut x, -radius, radius);
        let mut z = vec![0.0; dim];
        if i % 2 == 0 {
            rng.fill_uniform(&mut z, -radius, radius);
        } else {
            for (zi, xi) in z.iter_mut().zip(&x) {
                *zi = xi + 0.01 * radius * rng.normal();
            }
        }
        let denom = vecmath::dist2(&x, &z);
        if denom == 0.0 {
            continue;
        }
        let ix = Image::from_pixels(width, height, 1.0, x).expect("probe shape");
        let iz = Image::from_pixels(width, height, 1.0, z).expect("probe shape");
        let ratio = p.apply(&ix).dist2(&p.apply(&iz)) / denom;
        best = best.max(ratio);
    }
    best
}

/// Sampled idempotence check: `||P(P(x)) - P(x)|| <= tol * (1 + ||P(x)||)`
/// for every probe.
pub fn check_idempotence(
    p: &dyn Projector,
    width: usize,
    height: usize,
    n_samples: usize,
    tol: f64,
    seed: u64,
) -> bool {
    let mut rng = Rng::new(seed);
    let dim = width * height;
    for _ in 0..n_samples {
        let mut x = vec![0.0; dim];
        rng.fill_normal(&mut x, 0.0, 1.0);
        let img = Image::from_pixels(width, height, 1.0, x).expect("probe shape");
        let px = p.apply(&img);
        let ppx = p.apply(&px);
        if ppx.dist2(&px) > tol * (1.0 + px.norm2()) {
            return false;
        }
    }
    true
}
