//! Lipschitz graph domains `Ω_φ = {(t, x) : t > φ(x)}` over a torus base.
//!
//! Points of `ℝ^{1+n}` are `(t, x)` with the vertical coordinate first.
//! Horizontal separations use the torus metric of the base grid.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;

use crate::error::{param, Error, Result};
use crate::extension::annuli_surrogate;
use crate::grid::{lp_norm, Grid, GridFunction};
use crate::maximal::{tangential_max, ApproachRegionSpec};
use crate::potentials::{multi_indices, slobodeckij_seminorm, spectral_derivative};

/// A point `(t, x)` of `ℝ^{1+n}`; unused base axes are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub t: f64,
    pub x: [f64; 2],
}

impl Point {
    pub fn new(t: f64, x: [f64; 2]) -> Self {
        Self { t, x }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzGraph {
    phi: GridFunction,
    m: f64,
    smooth_class: u32,
    /// Range of `φ` over each block of [`BLOCK`] segments (one dimension only).
    blocks: Vec<(f64, f64)>,
}

/// Segments per block in the distance search.
const BLOCK: usize = 32;

fn block_ranges(phi: &GridFunction) -> Vec<(f64, f64)> {
    let g = phi.grid();
    if g.dim() != 1 {
        return Vec::new();
    }
    let n = g.n();
    let s = phi.samples();
    (0..n.div_ceil(BLOCK))
        .map(|b| {
            // segments b·B .. b·B + B touch samples up to b·B + B inclusive
            let end = (b * BLOCK + BLOCK).min(n);
            (b * BLOCK..=end).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
                let v = s[i % n];
                (lo.min(v), hi.max(v))
            })
        })
        .collect()
}

/// Largest adjacent-sample slope, times `√2` in two dimensions (a bound for
/// the bilinear interpolant).
pub fn discrete_lipschitz_constant(phi: &GridFunction) -> f64 {
    let g = *phi.grid();
    let n = g.n();
    let h = g.spacing();
    let s = phi.samples();
    let mut m = 0.0f64;
    for idx in 0..g.len() {
        let ij = g.unflatten(idx);
        for k in 0..g.dim() {
            let mut nb = ij;
            nb[k] = (nb[k] + 1) % n;
            m = m.max((s[g.flatten(nb)] - s[idx]).abs() / h);
        }
    }
    if g.dim() == 2 {
        m * std::f64::consts::SQRT_2
    } else {
        m
    }
}

impl LipschitzGraph {
    /// Graph of `phi` with its certified constant.
    pub fn new(phi: GridFunction, smooth_class: u32) -> Self {
        let m = discrete_lipschitz_constant(&phi);
        let blocks = block_ranges(&phi);
        Self {
            phi,
            m,
            smooth_class,
            blocks,
        }
    }

    /// Graph of `phi` with a declared constant `m`, rejected when the samples
    /// are steeper than `m`.
    pub fn with_constant(phi: GridFunction, m: f64, smooth_class: u32) -> Result<Self> {
        let cert = discrete_lipschitz_constant(&phi);
        if !(m >= 0.0) || cert > m * (1.0 + 1e-12) + 1e-12 {
            return param(format!(
                "profile has discrete Lipschitz constant {cert}, above the declared M = {m}"
            ));
        }
        let blocks = block_ranges(&phi);
        Ok(Self {
            phi,
            m,
            smooth_class,
            blocks,
        })
    }

    pub fn phi(&self) -> &GridFunction {
        &self.phi
    }

    pub fn grid(&self) -> &Grid {
        self.phi.grid()
    }

    pub fn lipschitz_constant(&self) -> f64 {
        self.m
    }

    pub fn smooth_class(&self) -> u32 {
        self.smooth_class
    }

    /// `φ(x)`, interpolated between samples.
    pub fn height(&self, x: &[f64]) -> f64 {
        self.phi.interpolate(x)
    }

    /// The boundary point above the base point `x`.
    pub fn boundary_point(&self, x: [f64; 2]) -> BoundaryPoint {
        BoundaryPoint {
            x,
            lift: self.height(&x),
        }
    }

    /// The boundary point above grid sample `idx`.
    pub fn boundary_sample(&self, idx: usize) -> BoundaryPoint {
        BoundaryPoint {
            x: self.grid().coords(idx),
            lift: self.phi.samples()[idx],
        }
    }

    /// `|X - Y|` with the torus metric on the base.
    pub fn separation(&self, a: &Point, b: &Point) -> f64 {
        let d = self.grid().displacement(&a.x, &b.x);
        (d[0] * d[0] + d[1] * d[1] + (a.t - b.t).powi(2)).sqrt()
    }
}

/// `Q = (φ(x), x)` on `∂Ω_φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub x: [f64; 2],
    pub lift: f64,
}

impl BoundaryPoint {
    pub fn point(&self) -> Point {
        Point::new(self.lift, self.x)
    }
}

/// Distance from `X` to the boundary: the piecewise-linear graph through the
/// samples in one dimension (the interpolant behind [`LipschitzGraph::height`]),
/// the sampled points `{(φ(x_i), x_i)}` in two.
pub fn graph_distance(graph: &LipschitzGraph, p: &Point) -> f64 {
    if graph.grid().dim() == 1 {
        polyline_distance(graph, p)
    } else {
        sampled_distance(graph, p)
    }
}

fn polyline_distance(graph: &LipschitzGraph, p: &Point) -> f64 {
    let g = graph.grid();
    let n = g.n() as i64;
    let h = g.spacing();
    let phi = graph.phi.samples();
    let c = g.nearest_index(&p.x) as i64;
    // horizontal offset of sample c from p
    let x0 = g.wrap(g.coords(c as usize)[0] - p.x[0]);
    // squared distance to the segment from sample c + k to c + k + 1
    let seg = |k: i64| {
        let a = phi[(c + k).rem_euclid(n) as usize] - p.t;
        let b = phi[(c + k + 1).rem_euclid(n) as usize] - p.t;
        let ax = x0 + k as f64 * h;
        let dt = b - a;
        let s = (-(ax * h + a * dt) / (h * h + dt * dt)).clamp(0.0, 1.0);
        let (u, v) = (ax + s * h, a + s * dt);
        u * u + v * v
    };
    let mut best = seg(-1).min(seg(0));
    let nb = graph.blocks.len() as i64;
    let bl = BLOCK as i64;
    let cb = c / bl;
    for step in 0..=nb / 2 {
        // blocks `step` away hold no segment nearer than ((step - 1) B - 1/2) h
        let hd = (((step - 1) * bl) as f64 - 0.5).max(0.0) * h;
        if hd * hd >= best {
            break;
        }
        let sides = if step == 0 { vec![cb] } else { vec![cb - step, cb + step] };
        for b in sides {
            let b = b.rem_euclid(nb);
            let (lo, hi) = graph.blocks[b as usize];
            let vd = (lo - p.t).max(p.t - hi).max(0.0);
            if hd * hd + vd * vd >= best {
                continue;
            }
            for i in b * bl..((b + 1) * bl).min(n) {
                let mut k = (i - c).rem_euclid(n);
                if k >= n / 2 {
                    k -= n;
                }
                best = best.min(seg(k));
            }
        }
    }
    best.sqrt()
}

fn sampled_distance(graph: &LipschitzGraph, p: &Point) -> f64 {
    let g = graph.grid();
    let n = g.n() as i64;
    let h = g.spacing();
    let phi = graph.phi.samples();
    let centre = g.unflatten(g.nearest_index(&p.x));
    let cc = [centre[0] as i64, centre[1] as i64];
    let dist_to = |a: i64, b: i64| {
        let ij = [a.rem_euclid(n) as usize, b.rem_euclid(n) as usize];
        let idx = g.flatten(ij);
        let q = Point::new(phi[idx], g.coords(idx));
        graph.separation(p, &q)
    };
    let mut best = dist_to(cc[0], cc[1]);
    for k in 1..=n / 2 {
        // every sample on ring k is at least (k - 1/2) h away horizontally
        if (k as f64 - 0.5) * h >= best {
            break;
        }
        for d in -k..=k {
            best = best
                .min(dist_to(cc[0] - k, cc[1] + d))
                .min(dist_to(cc[0] + k, cc[1] + d));
            if d.abs() < k {
                best = best
                    .min(dist_to(cc[0] + d, cc[1] - k))
                    .min(dist_to(cc[0] + d, cc[1] + k));
            }
        }
    }
    best
}

/// Corkscrew constant: `1/2` for `M <= 1`, else `min{1/4, 1/(2(M-1))}`.
pub fn corkscrew_constant(m: f64) -> f64 {
    if m <= 1.0 {
        0.5
    } else {
        (0.25f64).min(1.0 / (2.0 * (m - 1.0)))
    }
}

/// `A_t(Q₀) = (φ(x₀) + t, x₀)`.
pub fn corkscrew(graph: &LipschitzGraph, x0: [f64; 2], t: f64) -> Result<Point> {
    if !(t > 0.0 && t.is_finite()) {
        return param(format!("t must be positive, got {t}"));
    }
    Ok(Point::new(graph.height(&x0) + t, x0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// `F_φ(t, x) = (t - φ(x), x)` and its inverse `(t, x) ↦ (t + φ(x), x)`.
///
/// The forward image is nudged by at most a few ulps so that the inverse
/// reproduces `X` bit for bit.
pub fn flatten(graph: &LipschitzGraph, p: &Point, dir: Direction) -> Result<Point> {
    let a = graph.height(&p.x);
    match dir {
        Direction::Inverse => Ok(Point::new(p.t + a, p.x)),
        Direction::Forward => {
            if !(p.t > a) {
                return Err(Error::Domain(format!(
                    "point at height {} is not above the graph (φ = {a})",
                    p.t
                )));
            }
            let s = p.t - a;
            if s + a != p.t {
                let mut cand = s;
                let mut down = s;
                for _ in 0..8 {
                    cand = cand.next_up();
                    down = down.next_down();
                    if cand + a == p.t {
                        return Ok(Point::new(cand, p.x));
                    }
                    if down > 0.0 && down + a == p.t {
                        return Ok(Point::new(down, p.x));
                    }
                }
            }
            Ok(Point::new(s, p.x))
        }
    }
}

/// Opening of `Γ^{β,c}_Ω` at distance `d` from the boundary.
fn domain_opening(beta: f64, c: f64, d: f64) -> f64 {
    if d <= 1.0 {
        (1.0 + c) * d.powf(beta)
    } else {
        (1.0 + c) * d
    }
}

fn check_beta_c(beta: f64, c: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return param(format!("β must lie in (0, 1], got {beta}"));
    }
    if !(c > 0.0) {
        return param(format!("c must be positive, got {c}"));
    }
    Ok(())
}

/// Whether `X ∈ Γ^{β,c}_{Ω_φ}(Q₀)`.
pub fn domain_region_contains(
    graph: &LipschitzGraph,
    beta: f64,
    c: f64,
    q0: &BoundaryPoint,
    p: &Point,
) -> Result<bool> {
    check_beta_c(beta, c)?;
    let d = graph_distance(graph, p);
    Ok(graph.separation(p, &q0.point()) < domain_opening(beta, c, d))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InclusionReport {
    pub samples: usize,
    /// Candidate draws needed to collect `samples` members of the domain region.
    pub draws: usize,
    pub violations: usize,
    /// Up to ten `(Q₀, X)` pairs whose flattening left the target region.
    pub witnesses: Vec<(BoundaryPoint, Point)>,
}

/// Samples `Γ^{β,c}_{Ω_φ}(Q₀)` at random `Q₀` and checks that each point
/// flattens into `Γ^β_a(x₀)` with `a = target_scale · (1 + c)`.
///
/// Candidates sit above grid samples of the base, at vertical gaps up to 1
/// over the boundary, within half a period horizontally.
pub fn region_inclusion_check_scaled(
    graph: &LipschitzGraph,
    beta: f64,
    c: f64,
    samples: usize,
    seed: u64,
    target_scale: f64,
) -> Result<InclusionReport> {
    check_beta_c(beta, c)?;
    if samples == 0 {
        return param("samples must be >= 1");
    }
    if !(target_scale > 0.0) {
        return param("target scale must be positive");
    }
    let g = *graph.grid();
    let target = ApproachRegionSpec::new(beta, target_scale * (1.0 + c), f64::INFINITY)?;
    const CHUNK: usize = 1024;
    let chunks = samples.div_ceil(CHUNK);
    let results: Vec<(usize, usize, Vec<(BoundaryPoint, Point)>)> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let want = CHUNK.min(samples - ci * CHUNK);
            let mut rng = SplitMix64::seed_from_u64(seed ^ (ci as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let (mut got, mut draws, mut bad) = (0usize, 0usize, Vec::new());
            let mut viol = 0usize;
            while got < want {
                draws += 1;
                let q = graph.boundary_sample(rng.random_range(0..g.len()));
                let idx = rng.random_range(0..g.len());
                let x = g.coords(idx);
                let gap: f64 = 1.0 - rng.random::<f64>();
                let p = Point::new(graph.phi.samples()[idx] + gap, x);
                let sep = graph.separation(&p, &q.point());
                // the opening grows with d and d <= gap: a cheap rejection first
                if sep >= domain_opening(beta, c, gap) {
                    continue;
                }
                let d = graph_distance(graph, &p);
                if sep >= domain_opening(beta, c, d) {
                    continue;
                }
                got += 1;
                let f = flatten(graph, &p, Direction::Forward).expect("sample lies above the graph");
                let r = g.distance(&f.x, &q.x);
                if !(r < target.radius(f.t)) {
                    viol += 1;
                    if bad.len() < 10 {
                        bad.push((q, p));
                    }
                }
            }
            (draws, viol, bad)
        })
        .collect();
    let mut rep = InclusionReport {
        samples,
        draws: 0,
        violations: 0,
        witnesses: Vec::new(),
    };
    for (d, v, w) in results {
        rep.draws += d;
        rep.violations += v;
        for x in w {
            if rep.witnesses.len() < 10 {
                rep.witnesses.push(x);
            }
        }
    }
    Ok(rep)
}

/// [`region_inclusion_check_scaled`] with the target `Γ^β_{1+c}`.
pub fn region_inclusion_check(
    graph: &LipschitzGraph,
    beta: f64,
    c: f64,
    samples: usize,
    seed: u64,
) -> Result<InclusionReport> {
    region_inclusion_check_scaled(graph, beta, c, samples, seed, 1.0)
}

/// Area density `(1 + |∇φ|²)^{1/2}` with centred differences.
pub fn surface_density(graph: &LipschitzGraph) -> GridFunction {
    let g = *graph.grid();
    let n = g.n();
    let h = g.spacing();
    let s = graph.phi.samples();
    let dens = (0..g.len())
        .map(|idx| {
            let ij = g.unflatten(idx);
            let mut q = 1.0;
            for k in 0..g.dim() {
                let mut a = ij;
                let mut b = ij;
                a[k] = (a[k] + 1) % n;
                b[k] = (b[k] + n - 1) % n;
                let d = (s[g.flatten(a)] - s[g.flatten(b)]) / (2.0 * h);
                q += d * d;
            }
            q.sqrt()
        })
        .collect();
    GridFunction::new(g, dens).expect("density has the grid's length")
}

/// `σ(S)` for the boundary patch over the base samples selected by `member`.
pub fn surface_measure(graph: &LipschitzGraph, member: impl Fn(usize) -> bool) -> f64 {
    let dens = surface_density(graph);
    let vol = graph.grid().cell_volume();
    dens.samples()
        .iter()
        .enumerate()
        .filter(|(i, _)| member(*i))
        .map(|(_, d)| d * vol)
        .sum()
}

fn in_surface_ball(graph: &LipschitzGraph, q: &BoundaryPoint, r: f64, idx: usize) -> bool {
    let b = graph.boundary_sample(idx);
    graph.separation(&b.point(), &q.point()) < r
}

/// `σ(Δ_{∂Ω}(Q, r))` by the area formula on the base grid.
pub fn surface_ball_measure(graph: &LipschitzGraph, q: &BoundaryPoint, r: f64) -> Result<f64> {
    let g = graph.grid();
    let h = g.spacing();
    if !(r >= 4.0 * h * (1.0 - 1e-12) && r <= 0.25 * g.extent() * (1.0 + 1e-12)) {
        return param(format!("r = {r} outside [4h, L/4] = [{}, {}]", 4.0 * h, 0.25 * g.extent()));
    }
    Ok(surface_measure(graph, |i| in_surface_ball(graph, q, r, i)))
}

/// `‖g‖_{L^p(σ)}` for `g` on the base grid.
pub fn surface_lp_norm(graph: &LipschitzGraph, f: &GridFunction, p: f64) -> Result<f64> {
    if f.grid() != graph.grid() {
        return param("function and graph live on different grids");
    }
    if !(p >= 1.0) {
        return param(format!("p must be >= 1, got {p}"));
    }
    let dens = surface_density(graph);
    let vol = graph.grid().cell_volume();
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let s: f64 = f
        .samples()
        .iter()
        .zip(dens.samples())
        .map(|(v, d)| v.abs().powf(p) * d * vol)
        .sum();
    Ok(s.powf(1.0 / p))
}

/// `W^{s,p}` norm of the chart pullback `f` on the base grid,
/// `(‖f‖_p^p + Σ_{|γ|=k} (‖∂^γ f‖_p^p + [∂^γ f]_{s-k,p}^p))^{1/p}` with
/// `k = ⌊s⌋` (the derivative terms only when `k >= 1`, the seminorm only when
/// `s` is fractional). Supports `s ∈ [0, 4)`.
pub fn boundary_seminorm(graph: &LipschitzGraph, f: &GridFunction, s: f64, p: f64) -> Result<f64> {
    if f.grid() != graph.grid() {
        return param("function and graph live on different grids");
    }
    if !(s >= 0.0 && s < 4.0) {
        return param(format!("s must lie in [0, 4), got {s}"));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return param(format!("p must be finite and >= 1, got {p}"));
    }
    let k = s.floor() as u32;
    let sigma = s - k as f64;
    let all: Vec<usize> = (0..f.grid().len()).collect();
    let mut total = lp_norm(f, p)?.powf(p);
    let parts: Vec<GridFunction> = if k == 0 {
        vec![f.clone()]
    } else {
        multi_indices(f.grid().dim(), k)
            .iter()
            .map(|gamma| spectral_derivative(f, &gamma[..f.grid().dim()]))
            .collect::<Result<_>>()?
    };
    for part in &parts {
        if k > 0 {
            total += lp_norm(part, p)?.powf(p);
        }
        if sigma > 0.0 {
            total += slobodeckij_seminorm(part, sigma, p, &all)?.powf(p);
        }
    }
    Ok(total.powf(1.0 / p))
}

/// Parameters of the dyadic-annuli solution surrogate.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateParams {
    pub alpha_l: f64,
    /// Averaging exponent `p₀`.
    pub p0: f64,
    pub j_max: u32,
    pub heights: Vec<f64>,
}

impl SurrogateParams {
    /// `p₀ = (1 + p)/2` and heights `2^{-k}`, `k = 0..=levels + 2`.
    pub fn for_exponent(grid: &Grid, p: f64, alpha_l: f64, j_max: u32) -> Self {
        Self {
            alpha_l,
            p0: 0.5 * (1.0 + p),
            j_max,
            heights: crate::extension::dyadic_heights(1.0, grid.levels() + 2),
        }
    }
}

/// Tangential maximal function of the flattened surrogate field over
/// `Γ^β_{1+c}`, one value per boundary point `(φ(x₀), x₀)`.
pub fn boundary_tangential_max(
    graph: &LipschitzGraph,
    f: &GridFunction,
    beta: f64,
    c: f64,
    params: &SurrogateParams,
) -> Result<GridFunction> {
    check_beta_c(beta, c)?;
    if f.grid() != graph.grid() {
        return param("function and graph live on different grids");
    }
    let abs = f.abs();
    let v = annuli_surrogate(&abs, &params.heights, params.alpha_l, params.p0, params.j_max)?;
    tangential_max(&v, &ApproachRegionSpec::new(beta, 1.0 + c, 1.0)?)
}

/// Periodic tent `φ(x) = M·dist(x, 0)` (slope `±M`, apex at `L/2`).
pub fn tent_profile(grid: &Grid, m: f64) -> GridFunction {
    let l = grid.extent();
    GridFunction::from_fn(*grid, |x| {
        let d0 = grid.wrap(x[0]).abs();
        let d1 = if grid.dim() == 2 { grid.wrap(x[1]).abs() } else { 0.0 };
        m * d0.max(d1).min(0.5 * l)
    })
    .expect("tent profile is finite")
}

/// Sawtooth of `teeth` tents per period with slopes `±M`.
pub fn sawtooth_profile(grid: &Grid, m: f64, teeth: u32) -> GridFunction {
    let period = grid.extent() / teeth as f64;
    GridFunction::from_fn(*grid, |x| {
        let y = x[0].rem_euclid(period);
        m * y.min(period - y)
    })
    .expect("sawtooth profile is finite")
}

/// Random trigonometric profile rescaled to discrete Lipschitz constant `m`.
pub fn random_profile(grid: &Grid, m: f64, modes: u32, seed: u64) -> GridFunction {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let tau = 2.0 * std::f64::consts::PI / grid.extent();
    let terms: Vec<(f64, [f64; 2], f64)> = (1..=modes)
        .map(|k| {
            let a = rng.random_range(-1.0..1.0) / k as f64;
            let ky = if grid.dim() == 2 { rng.random_range(0..=k) as f64 } else { 0.0 };
            let kx = k as f64;
            (a, [kx, ky], rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let raw = GridFunction::from_fn(*grid, |x| {
        terms
            .iter()
            .map(|(a, k, th)| a * (tau * (k[0] * x[0] + k[1] * x.get(1).copied().unwrap_or(0.0)) + th).sin())
            .sum()
    })
    .expect("profile is finite");
    let cert = discrete_lipschitz_constant(&raw);
    if cert == 0.0 {
        raw
    } else {
        raw.scale(m / cert)
    }
}
