//! Self-similar Cantor measures, box counting, and divergence sets of
//! half-space fields.

use rayon::prelude::*;

use crate::error::{param, Result};
use crate::extension::HalfSpaceField;
use crate::grid::{BallStencil, Grid, GridFunction, PowerSums};
use crate::maximal::ApproachRegionSpec;
use crate::potentials::{BesselFunction, Representative};

/// Two-branch self-similar probability measure on `[origin, origin + 1)` with
/// contraction `ρ = 2^{-1/s}`, truncated at `depth` and uniform on each of
/// the `2^depth` support intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct CantorMeasure {
    pub dim_target: f64,
    pub ratio: f64,
    pub depth: u32,
    pub origin: f64,
    lefts: Vec<f64>,
}

pub fn cantor_measure(s: f64, depth: u32) -> Result<CantorMeasure> {
    if !(s > 0.0 && s <= 1.0) {
        return param(format!("s must lie in (0, 1], got {s}"));
    }
    if depth > 24 {
        return param(format!("depth must be <= 24, got {depth}"));
    }
    let rho = 2f64.powf(-1.0 / s);
    let mut lefts = vec![0.0];
    let mut len = 1.0;
    for _ in 0..depth {
        let child = len * rho;
        lefts = lefts
            .iter()
            .flat_map(|&a| [a, a + len - child])
            .collect();
        len = child;
    }
    Ok(CantorMeasure {
        dim_target: s,
        ratio: rho,
        depth,
        origin: 0.0,
        lefts,
    })
}

impl CantorMeasure {
    /// The same measure translated to start at `origin`.
    pub fn with_origin(mut self, origin: f64) -> Self {
        self.origin = origin;
        self
    }

    /// Length `ρ^depth` of each support interval.
    pub fn interval_length(&self) -> f64 {
        self.ratio.powi(self.depth as i32)
    }

    /// Mass `2^{-depth}` of each support interval.
    pub fn interval_mass(&self) -> f64 {
        0.5f64.powi(self.depth as i32)
    }

    /// Support intervals `[a, a + ρ^depth)` in absolute coordinates.
    pub fn support(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let l = self.interval_length();
        self.lefts.iter().map(move |&a| (self.origin + a, self.origin + a + l))
    }

    pub fn similarity_dimension(&self) -> f64 {
        2f64.ln() / (1.0 / self.ratio).ln()
    }

    /// `μ((lo, hi))` on the real line.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        self.mass_rec(self.origin, 1.0, 0, lo, hi)
    }

    fn mass_rec(&self, a: f64, len: f64, level: u32, lo: f64, hi: f64) -> f64 {
        let b = a + len;
        if b <= lo || a >= hi {
            return 0.0;
        }
        let mass = 0.5f64.powi(level as i32);
        if lo <= a && b <= hi {
            return mass;
        }
        if level == self.depth {
            return mass * (b.min(hi) - a.max(lo)) / len;
        }
        let child = len * self.ratio;
        self.mass_rec(a, child, level + 1, lo, hi) + self.mass_rec(b - child, child, level + 1, lo, hi)
    }

    /// `μ(Δ(x, r))` for the open ball.
    pub fn ball_mass(&self, x: f64, r: f64) -> f64 {
        self.mass_between(x - r, x + r)
    }

    /// Radii `ρ^k` and `ρ^k / 2` for `k <= depth` that lie in `[ρ^depth, 1]`.
    pub fn construction_radii(&self) -> Vec<f64> {
        let lo = self.interval_length();
        let mut v: Vec<f64> = (0..=self.depth)
            .flat_map(|k| {
                let r = self.ratio.powi(k as i32);
                [r, 0.5 * r]
            })
            .filter(|&r| r >= lo * (1.0 - 1e-12) && r <= 1.0)
            .collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v.dedup();
        v
    }

    /// Midpoints of the support intervals as a point set on `grid`.
    pub fn support_points(&self, grid: &Grid) -> PointSet {
        let l = self.interval_length();
        PointSet {
            grid: *grid,
            points: self.support().map(|(a, _)| [a + 0.5 * l, 0.0]).collect(),
        }
    }
}

/// Levels whose interval endpoints and midpoints serve as ball centres.
pub const FROSTMAN_CENTRE_LEVELS: u32 = 12;

/// `max μ(Δ(x, r)) / r^s` over centres at endpoints and midpoints of the
/// construction intervals (levels up to [`FROSTMAN_CENTRE_LEVELS`]) and the
/// given radii.
pub fn frostman_constant(mu: &CantorMeasure, radii: &[f64]) -> Result<f64> {
    if radii.is_empty() {
        return param("at least one radius is required");
    }
    let lo = mu.interval_length();
    if let Some(r) = radii.iter().find(|&&r| !(r >= lo * (1.0 - 1e-12) && r <= 1.0)) {
        return param(format!("radius {r} outside [ρ^depth, 1] = [{lo}, 1]"));
    }
    let levels = mu.depth.min(FROSTMAN_CENTRE_LEVELS);
    let mut centres = Vec::new();
    let mut lefts = vec![mu.origin];
    let mut len = 1.0;
    for level in 0..=levels {
        for &a in &lefts {
            centres.extend([a, a + 0.5 * len, a + len]);
        }
        if level == levels {
            break;
        }
        let child = len * mu.ratio;
        lefts = lefts.iter().flat_map(|&a| [a, a + len - child]).collect();
        len = child;
    }
    let s = mu.dim_target;
    let best = centres
        .par_iter()
        .map(|&x| {
            radii
                .iter()
                .map(|&r| mu.ball_mass(x, r) / r.powf(s))
                .fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

/// `∫ f dμ` by the midpoint rule on the level-`depth` intervals, reading
/// `f` at the grid point nearest each midpoint.
pub fn integrate_against(f: &GridFunction, mu: &CantorMeasure) -> Result<f64> {
    check_embedded(f.grid(), mu)?;
    let l = mu.interval_length();
    let s: f64 = mu.support().map(|(a, _)| f.value_near(&[a + 0.5 * l])).sum();
    Ok(s * mu.interval_mass())
}

/// As [`integrate_against`] with linear interpolation between grid points.
pub fn integrate_against_interp(f: &GridFunction, mu: &CantorMeasure) -> Result<f64> {
    check_embedded(f.grid(), mu)?;
    let l = mu.interval_length();
    let s: f64 = mu.support().map(|(a, _)| f.interpolate(&[a + 0.5 * l])).sum();
    Ok(s * mu.interval_mass())
}

fn check_embedded(g: &Grid, mu: &CantorMeasure) -> Result<()> {
    if g.dim() != 1 {
        return param("Cantor measures live on one-dimensional grids");
    }
    if mu.origin < 0.0 || mu.origin + 1.0 > g.extent() * (1.0 + 1e-12) {
        return param(format!(
            "measure on [{}, {}) does not fit in the torus [0, {})",
            mu.origin,
            mu.origin + 1.0,
            g.extent()
        ));
    }
    Ok(())
}

/// A finite set of points on a torus grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub grid: Grid,
    pub points: Vec<[f64; 2]>,
}

impl PointSet {
    pub fn new(grid: Grid, points: Vec<[f64; 2]>) -> Result<Self> {
        let l = grid.extent();
        for p in &points {
            for &c in &p[..grid.dim()] {
                if !(c >= 0.0 && c < l) {
                    return param(format!("point coordinate {c} outside [0, {l})"));
                }
            }
        }
        Ok(Self { grid, points })
    }

    /// Grid points whose flat index satisfies `mask`.
    pub fn from_mask(grid: Grid, mask: &[bool]) -> Self {
        let points = mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| grid.coords(i))
            .collect();
        Self { grid, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of occupied boxes of side `L 2^{-m}`.
    pub fn box_count(&self, m: u32) -> usize {
        let side = self.grid.extent() / 2f64.powi(m as i32);
        let per = 1i64 << m;
        let mut keys: Vec<(i64, i64)> = self
            .points
            .iter()
            .map(|p| {
                let a = ((p[0] / side).floor() as i64).rem_euclid(per);
                let b = if self.grid.dim() == 2 {
                    ((p[1] / side).floor() as i64).rem_euclid(per)
                } else {
                    0
                };
                (a, b)
            })
            .collect();
        keys.sort_unstable();
        keys.dedup();
        keys.len()
    }

    /// `N(2^{-m}) (L 2^{-m})^γ`, a box-counting stand-in for Hausdorff content.
    pub fn box_content(&self, m: u32, gamma: f64) -> f64 {
        self.box_count(m) as f64 * (self.grid.extent() / 2f64.powi(m as i32)).powf(gamma)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxDimension {
    pub slope: f64,
    /// Coefficient of determination of the least-squares fit.
    pub r2: f64,
    /// `(m, N(2^{-m}))` for each scale in the window.
    pub counts: Vec<(u32, usize)>,
    /// Set when the point set was empty.
    pub empty: bool,
}

/// Least-squares slope of `log₂ N(2^{-m})` against `m` over `m_lo..=m_hi`.
pub fn box_dimension(set: &PointSet, window: (u32, u32)) -> Result<BoxDimension> {
    let (lo, hi) = window;
    if lo >= hi || hi > set.grid.levels() {
        return param(format!(
            "window must satisfy m_lo < m_hi <= {}, got ({lo}, {hi})",
            set.grid.levels()
        ));
    }
    let ms: Vec<u32> = (lo..=hi).collect();
    if set.is_empty() {
        return Ok(BoxDimension {
            slope: 0.0,
            r2: 0.0,
            counts: ms.iter().map(|&m| (m, 0)).collect(),
            empty: true,
        });
    }
    let counts: Vec<(u32, usize)> = ms.par_iter().map(|&m| (m, set.box_count(m))).collect();
    let xs: Vec<f64> = counts.iter().map(|c| c.0 as f64).collect();
    let ys: Vec<f64> = counts.iter().map(|c| (c.1 as f64).log2()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(BoxDimension {
        slope: slope.clamp(0.0, set.grid.dim() as f64),
        r2,
        counts,
        empty: false,
    })
}

/// Windowed max and min of a slice over the ball stencil of radius `radius`.
fn window_extrema(grid: &Grid, vals: &[f64], radius: f64) -> (Vec<f64>, Vec<f64>) {
    let st = BallStencil::new(grid, radius);
    let mut hi = vec![f64::NEG_INFINITY; grid.len()];
    let mut lo = vec![f64::INFINITY; grid.len()];
    hi.par_iter_mut()
        .zip(lo.par_iter_mut())
        .enumerate()
        .for_each(|(i, (h, l))| {
            st.for_each(grid, grid.unflatten(i), |idx, _| {
                let v = vals[idx];
                if v > *h {
                    *h = v;
                }
                if v < *l {
                    *l = v;
                }
            });
        });
    (hi, lo)
}

/// Localised oscillation `sup_{(t,x) ∈ Γ, t <= t_min} |u(t,x) - f_ref(x₀)|`.
pub fn oscillation(
    u: &HalfSpaceField,
    f_ref: &GridFunction,
    spec: &ApproachRegionSpec,
    t_min: f64,
) -> Result<GridFunction> {
    spec.validate()?;
    let g = *u.grid();
    if f_ref.grid() != &g {
        return param("reference function and field live on different grids");
    }
    let finest = *u.heights().last().expect("fields have heights");
    if t_min < finest * (1.0 - 1e-9) {
        return param(format!("t_min = {t_min} is below the finest height {finest}"));
    }
    let mut osc = vec![0.0f64; g.len()];
    let c = f_ref.samples();
    for (k, &t) in u.heights().iter().enumerate() {
        if t > t_min * (1.0 + 1e-9) || t > spec.t_max {
            continue;
        }
        let (hi, lo) = window_extrema(&g, u.slice(k), spec.radius(t));
        for i in 0..g.len() {
            let o = (hi[i] - c[i]).max(c[i] - lo[i]);
            if o > osc[i] {
                osc[i] = o;
            }
        }
    }
    GridFunction::new(g, osc)
}

/// `{x₀ : sup_{(t,x) ∈ Γ(x₀), t <= t_min} |u(t,x) - f_ref(x₀)| > ε}`.
pub fn divergence_set(
    u: &HalfSpaceField,
    f_ref: &GridFunction,
    spec: &ApproachRegionSpec,
    eps: f64,
    t_min: f64,
) -> Result<PointSet> {
    divergence_set_forced(u, f_ref, None, spec, eps, t_min)
}

/// As [`divergence_set`], also including every point flagged in `forced`
/// (points where the reference value itself diverges).
pub fn divergence_set_forced(
    u: &HalfSpaceField,
    f_ref: &GridFunction,
    forced: Option<&[bool]>,
    spec: &ApproachRegionSpec,
    eps: f64,
    t_min: f64,
) -> Result<PointSet> {
    if !(eps > 0.0) {
        return param(format!("ε must be positive, got {eps}"));
    }
    let osc = oscillation(u, f_ref, spec, t_min)?;
    let mask: Vec<bool> = osc
        .samples()
        .iter()
        .enumerate()
        .map(|(i, &o)| o > eps || forced.is_some_and(|f| f[i]))
        .collect();
    Ok(PointSet::from_mask(*u.grid(), &mask))
}

/// Preferred representative at every grid point: Cauchy limits of ball means
/// along `radii`, with the last mean kept where the limit is not resolved.
/// The mask marks those diverged points.
pub fn representative_field(
    bf: &BesselFunction,
    radii: &[f64],
    tol: f64,
) -> Result<(GridFunction, Vec<bool>)> {
    let g = *bf.f.grid();
    if radii.len() < 3 || radii.windows(2).any(|w| w[1] >= w[0]) {
        return param("need at least three strictly decreasing radii");
    }
    if radii[radii.len() - 1] < 4.0 * g.spacing() * (1.0 - 1e-12) {
        return param("smallest radius is below 4h");
    }
    let ps = PowerSums::linear(&bf.f);
    let stencils: Vec<BallStencil> = radii.iter().map(|&r| BallStencil::new(&g, r)).collect();
    let (vals, div): (Vec<f64>, Vec<bool>) = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let a: Vec<f64> = stencils
                .iter()
                .map(|st| ps.ball_sum(st, i) / st.count() as f64)
                .collect();
            let tail = &a[a.len() - 3..];
            let ok = tail
                .windows(2)
                .all(|w| (w[1] - w[0]).abs() < tol * (1.0 + w[0].abs()));
            let rep = if ok {
                Representative::Value(tail[2])
            } else {
                Representative::Diverged
            };
            (tail[2], rep == Representative::Diverged)
        })
        .unzip();
    Ok((GridFunction::new(g, vals)?, div))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::{dyadic_heights, poisson_extend};
    use crate::grid::make_grid;
    use crate::potentials::{representative_value, REPRESENTATIVE_TOL};

    #[test]
    fn cantor_construction() {
        let mu = cantor_measure(1.0, 6).unwrap();
        assert_eq!(mu.ratio, 0.5);
        let total: f64 = mu.support().map(|(a, b)| b - a).sum();
        assert!((total - 1.0).abs() < 1e-15);
        let mu = cantor_measure(2f64.ln() / 3f64.ln(), 5).unwrap();
        assert!((mu.ratio - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(mu.support().count(), 32);
        assert!((mu.interval_length() - 3f64.powi(-5)).abs() < 1e-15);
        assert!((mu.similarity_dimension() - mu.dim_target).abs() < 1e-14);
        // middle-thirds level-2 intervals
        let mu2 = cantor_measure(2f64.ln() / 3f64.ln(), 2).unwrap();
        let lefts: Vec<f64> = mu2.support().map(|(a, _)| a).collect();
        for (a, b) in lefts.iter().zip([0.0, 2.0 / 9.0, 6.0 / 9.0, 8.0 / 9.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(cantor_measure(0.0, 3).is_err());
        assert!(cantor_measure(0.5, 25).is_err());
    }

    #[test]
    fn interval_masses_scale() {
        let mu = cantor_measure(0.6, 10).unwrap();
        let l = mu.interval_length();
        let (a, _) = mu.support().nth(37).unwrap();
        assert!((mu.mass_between(a - 1e-12, a + l + 1e-12) - mu.interval_mass()).abs() < 1e-15);
        for k in 0..=10 {
            let m = 0.5f64.powi(k);
            assert!((mu.ratio.powi(k).powf(-mu.dim_target) * m - 1.0).abs() < 1e-12);
        }
        assert!((mu.mass_between(-1.0, 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn frostman_examples() {
        let leb = cantor_measure(1.0, 10).unwrap();
        let c = frostman_constant(&leb, &leb.construction_radii()).unwrap();
        assert!((c - 2.0).abs() < 1e-12);
        let s = 2f64.ln() / 3f64.ln();
        let c10 = {
            let mu = cantor_measure(s, 10).unwrap();
            frostman_constant(&mu, &mu.construction_radii()).unwrap()
        };
        let c14 = {
            let mu = cantor_measure(s, 14).unwrap();
            frostman_constant(&mu, &mu.construction_radii()).unwrap()
        };
        assert!((1.0..=4.0).contains(&c10));
        assert!((c14 / c10 - 1.0).abs() < 0.1);
        assert!((c10 - 2f64.powf(s)).abs() < 1e-12);
    }

    #[test]
    fn integration_examples() {
        let g = make_grid(1, 12, 1.0).unwrap();
        let mu = cantor_measure(0.7, 10).unwrap();
        let c = GridFunction::constant(g, 2.5);
        assert!((integrate_against(&c, &mu).unwrap() - 2.5).abs() < 1e-12);
        let f = GridFunction::from_fn(g, |x| (x[0] * 5.0).sin()).unwrap();
        let a = integrate_against(&f, &mu).unwrap();
        let b = integrate_against_interp(&f, &mu).unwrap();
        assert!((a - b).abs() <= 5.0 * g.spacing());
        let off = mu.clone().with_origin(0.5);
        assert!(integrate_against(&f, &off).is_err());
    }

    #[test]
    fn box_dimension_calibration() {
        let g = make_grid(1, 14, 1.0).unwrap();
        let single = PointSet::new(g, vec![[0.3, 0.0]]).unwrap();
        let d = box_dimension(&single, (4, 10)).unwrap();
        assert!(d.slope.abs() < 0.05);
        let full = PointSet::from_mask(g, &vec![true; g.len()]);
        assert!((box_dimension(&full, (4, 10)).unwrap().slope - 1.0).abs() < 0.05);
        let mu = cantor_measure(2f64.ln() / 3f64.ln(), 14).unwrap();
        let d = box_dimension(&mu.support_points(&g), (4, 10)).unwrap();
        assert!((d.slope - 0.6309).abs() < 0.05, "{}", d.slope);
        let empty = PointSet::new(g, vec![]).unwrap();
        assert!(box_dimension(&empty, (4, 10)).unwrap().empty);
        assert!(box_dimension(&single, (10, 4)).is_err());
        assert!(PointSet::new(g, vec![[1.5, 0.0]]).is_err());
    }

    #[test]
    fn smooth_data_has_no_divergence() {
        let g = make_grid(1, 10, 1.0).unwrap();
        let f = GridFunction::from_fn(g, |x| (2.0 * std::f64::consts::PI * x[0]).cos()).unwrap();
        let hs = dyadic_heights(1.0, 12);
        let u = poisson_extend(&f, &hs).unwrap();
        // at β = 1 the region at t = 2^{-10} has radius h, so only the
        // Poisson smoothing error and one grid step of variation remain
        let spec = ApproachRegionSpec::new(1.0, 1.0, 1.0).unwrap();
        let set = divergence_set(&u, &f, &spec, 0.01, hs[10]).unwrap();
        assert!(set.is_empty());
        let wide = ApproachRegionSpec::new(0.5, 1.0, 1.0).unwrap();
        let set = divergence_set(&u, &f, &wide, 0.01, hs[12]).unwrap();
        assert!(set.len() > g.len() / 2 && set.len() < g.len());
        assert!(divergence_set(&u, &f, &spec, 0.01, hs[12] / 2.0).is_err());
    }

    #[test]
    fn divergence_set_monotone() {
        let g = make_grid(1, 10, 1.0).unwrap();
        let mut s = vec![0.0; g.len()];
        s[512] = 1.0 / g.spacing();
        let bf = BesselFunction::new(GridFunction::new(g, s).unwrap(), 0.25, 2.0).unwrap();
        let hs = dyadic_heights(1.0, 12);
        let u = poisson_extend(&bf.f, &hs).unwrap();
        let spec = ApproachRegionSpec::new(1.0, 1.0, 1.0).unwrap();
        let a = divergence_set(&u, &bf.f, &spec, 0.5, hs[6]).unwrap();
        let b = divergence_set(&u, &bf.f, &spec, 1.0, hs[6]).unwrap();
        let c = divergence_set(&u, &bf.f, &spec, 1.0, hs[4]).unwrap();
        assert!(b.points.iter().all(|p| a.points.contains(p)));
        assert!(b.points.iter().all(|p| c.points.contains(p)));
        assert!(!a.is_empty());
        // concentrates near the spike
        assert!(b.points.iter().all(|p| (p[0] - 0.5).abs() < 0.25));
    }

    #[test]
    fn representative_field_matches_pointwise() {
        let g = make_grid(1, 12, 1.0).unwrap();
        let mut s = vec![0.0; g.len()];
        s[2048] = 1.0 / g.spacing();
        let bf = BesselFunction::new(GridFunction::new(g, s).unwrap(), 0.25, 2.0).unwrap();
        let radii: Vec<f64> = (3..=8).map(|k| 2f64.powi(-k)).collect();
        let (vals, div) = representative_field(&bf, &radii, REPRESENTATIVE_TOL).unwrap();
        for i in [0usize, 1000, 2000, 2048, 3000] {
            let x = g.coords(i);
            match representative_value(&bf, &x[..1], &radii, REPRESENTATIVE_TOL).unwrap() {
                Representative::Value(v) => {
                    assert!(!div[i]);
                    assert!((v - vals.samples()[i]).abs() < 1e-12);
                }
                Representative::Diverged => assert!(div[i]),
            }
        }
        assert!(div[2048]);
    }
}
