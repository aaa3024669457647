use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{CompiledExpr, DynamicsError, ElSystem, OdeSystem, Trajectory};
use crate::legendre::{ModelSpec, TAU_EQ};
use crate::symexpr::Var;

pub const DEFAULT_SEGMENTS: usize = 4;

/// Positions sampled on a uniform grid, one column per model coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPath {
    pub t0: f64,
    pub dt: f64,
    pub positions: Vec<Vec<f64>>,
}

impl SampledPath {
    pub fn len(&self) -> usize {
        self.positions.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `(value, first, second)` derivative estimates from five equally spaced
/// samples `f(t - 2h) .. f(t + 2h)`.
fn stencil(f: [f64; 5], h: f64) -> (f64, f64, f64) {
    let d1 = (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h);
    let d2 = (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h);
    (f[2], d1, d2)
}

fn compiled_residuals(m: &ModelSpec, el: &ElSystem) -> Result<(Vec<CompiledExpr>, BTreeMap<Var, usize>), DynamicsError> {
    let vars: Vec<Var> = m.coords.iter().chain(&m.velocities).chain(&m.accelerations).copied().collect();
    let slots = OdeSystem::slots(&vars);
    let mut consts = BTreeMap::new();
    m.symbols.bind_algebraic(&mut consts);
    let res = el.residuals.iter().map(|r| CompiledExpr::new(r, &slots, &consts)).collect::<Result<_, _>>()?;
    Ok((res, slots))
}

fn max_residual(res: &[CompiledExpr], state: &[f64]) -> f64 {
    res.iter().map(|r| r.eval(state).abs()).fold(0.0, f64::max)
}

/// Largest Euler-Lagrange residual over the interior samples of `path`,
/// with velocities and accelerations from five-point central stencils.
pub fn stencil_el_residual(m: &ModelSpec, el: &ElSystem, path: &SampledPath) -> Result<f64, DynamicsError> {
    let n = m.dof();
    if path.positions.len() != n || path.len() < 5 {
        return Err(DynamicsError::BadInput("path needs one column per coordinate and at least five samples".to_string()));
    }
    let (res, _) = compiled_residuals(m, el)?;
    let mut state = alloc::vec![0.0; 3 * n];
    let mut worst: f64 = 0.0;
    for k in 2..path.len() - 2 {
        for (i, col) in path.positions.iter().enumerate() {
            let (q, v, a) = stencil([col[k - 2], col[k - 1], col[k], col[k + 1], col[k + 2]], path.dt);
            state[i] = q;
            state[n + i] = v;
            state[2 * n + i] = a;
        }
        let r = max_residual(&res, &state);
        if !r.is_finite() {
            return Err(DynamicsError::Expr(crate::symexpr::ExprError::Singular));
        }
        worst = worst.max(r);
    }
    Ok(worst)
}

fn coord_index(m: &ModelSpec, name: &str) -> Result<usize, DynamicsError> {
    m.coords
        .iter()
        .position(|&q| m.symbols.name(q) == name)
        .ok_or_else(|| DynamicsError::BadInput(alloc::format!("model has no coordinate {name}")))
}

/// Fixed-step RK4 for `u' = F(t, u)` on `n` steps from `t0`, returning all samples.
fn rk4_time(mut u: [f64; 2], t0: f64, dt: f64, n: usize, rhs: impl Fn(f64, [f64; 2]) -> [f64; 2]) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(u);
    for k in 0..n {
        let t = t0 + k as f64 * dt;
        let add = |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
        let k1 = rhs(t, u);
        let k2 = rhs(t + 0.5 * dt, add(u, k1, 0.5 * dt));
        let k3 = rhs(t + 0.5 * dt, add(u, k2, 0.5 * dt));
        let k4 = rhs(t + dt, add(u, k3, dt));
        for i in 0..2 {
            u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push(u);
    }
    out
}

/// The family `w = f, x = g, y = int f g', z = int g' y` of the gauge model
/// `l = ((z_dot - y x_dot)^2 + (y_dot - w x_dot)^2)/2`, sampled on `[0, t_end]`
/// with `n` steps; `y` and `z` start at zero.
pub fn gauge_family(
    m: &ModelSpec,
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    dg: impl Fn(f64) -> f64,
    t_end: f64,
    n: usize,
) -> Result<SampledPath, DynamicsError> {
    let idx = ["w", "x", "y", "z"].map(|c| coord_index(m, c));
    let idx: Vec<usize> = idx.into_iter().collect::<Result<_, _>>()?;
    if m.dof() != 4 || n < 4 {
        return Err(DynamicsError::BadInput("gauge family needs coordinates w, x, y, z".to_string()));
    }
    let dt = t_end / n as f64;
    let yz = rk4_time([0.0, 0.0], 0.0, dt, n, |t, u| [f(t) * dg(t), dg(t) * u[0]]);
    let mut positions = alloc::vec![Vec::with_capacity(n + 1); 4];
    for (k, u) in yz.iter().enumerate() {
        let t = k as f64 * dt;
        positions[idx[0]].push(f(t));
        positions[idx[1]].push(g(t));
        positions[idx[2]].push(u[0]);
        positions[idx[3]].push(u[1]);
    }
    Ok(SampledPath { t0: 0.0, dt, positions })
}

/// Solution of `l = (z_dot - y x_dot)^2/2` with `x = f`, `y = g` and
/// `z = int f' g` (so `z_dot = y x_dot`), as a trajectory on `(q, v)`.
pub fn type_one_solution(
    m: &ModelSpec,
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    dg: impl Fn(f64) -> f64,
    t_end: f64,
    n: usize,
) -> Result<Trajectory, DynamicsError> {
    let [ix, iy, iz] = ["x", "y", "z"].map(|c| coord_index(m, c));
    let (ix, iy, iz) = (ix?, iy?, iz?);
    if m.dof() != 3 || n == 0 {
        return Err(DynamicsError::BadInput("type-one solution needs coordinates x, y, z".to_string()));
    }
    let dt = t_end / n as f64;
    let zs = rk4_time([0.0, 0.0], 0.0, dt, n, |t, _| [df(t) * g(t), 0.0]);
    let mut states = Vec::with_capacity(n + 1);
    let mut times = Vec::with_capacity(n + 1);
    for (k, z) in zs.iter().enumerate() {
        let t = k as f64 * dt;
        let mut s = alloc::vec![0.0; 6];
        s[ix] = f(t);
        s[iy] = g(t);
        s[iz] = z[0];
        s[3 + ix] = df(t);
        s[3 + iy] = dg(t);
        s[3 + iz] = df(t) * g(t);
        states.push(s);
        times.push(t);
    }
    Ok(path_trajectory(m, times, states))
}

fn path_trajectory(m: &ModelSpec, times: Vec<f64>, states: Vec<Vec<f64>>) -> Trajectory {
    let vars: Vec<Var> = m.coords.iter().chain(&m.velocities).copied().collect();
    Trajectory {
        names: vars.iter().map(|&v| m.symbols.name(v).to_string()).collect(),
        vars,
        monitors: alloc::vec![Vec::new(); times.len()],
        times,
        states,
        monitor_names: Vec::new(),
        exit: None,
    }
}

// Quintic Hermite basis on [0, 1]: coefficients of u^0..u^5 for the data
// p0, v0, a0, a1, v1, p1.
const HERMITE: [[f64; 6]; 6] = [
    [1.0, 0.0, 0.0, -10.0, 15.0, -6.0],
    [0.0, 1.0, 0.0, -6.0, 8.0, -3.0],
    [0.0, 0.0, 0.5, -1.5, 1.5, -0.5],
    [0.0, 0.0, 0.0, 0.5, -1.0, 0.5],
    [0.0, 0.0, 0.0, -4.0, 7.0, -3.0],
    [0.0, 0.0, 0.0, 10.0, -15.0, 6.0],
];

#[derive(Clone, Copy, Debug, Default)]
struct Knot {
    pos: [f64; 2],
    vel: [f64; 2],
    acc: [f64; 2],
}

impl Knot {
    fn scaled(&self, a: f64) -> Knot {
        let s = |v: [f64; 2]| [a * v[0], a * v[1]];
        Knot { pos: s(self.pos), vel: s(self.vel), acc: s(self.acc) }
    }

    fn plus(&self, o: &Knot) -> Knot {
        let s = |a: [f64; 2], b: [f64; 2]| [a[0] + b[0], a[1] + b[1]];
        Knot { pos: s(self.pos, o.pos), vel: s(self.vel, o.vel), acc: s(self.acc, o.acc) }
    }
}

fn hermite_data(k0: &Knot, k1: &Knot, hs: f64, c: usize) -> [f64; 6] {
    [k0.pos[c], hs * k0.vel[c], hs * hs * k0.acc[c], hs * hs * k1.acc[c], hs * k1.vel[c], k1.pos[c]]
}

fn segment_poly(k0: &Knot, k1: &Knot, hs: f64, c: usize) -> Vec<f64> {
    let d = hermite_data(k0, k1, hs, c);
    (0..6).map(|j| (0..6).map(|b| d[b] * HERMITE[b][j]).sum()).collect()
}

fn peval(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * u + a)
}

fn pderiv(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(i, &a)| i as f64 * a).collect()
}

fn pmul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = alloc::vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn pantideriv(c: &[f64]) -> Vec<f64> {
    let mut out = alloc::vec![0.0];
    out.extend(c.iter().enumerate().map(|(i, &a)| a / (i + 1) as f64));
    out
}

// Five-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
const GL_WEIGHTS: [f64; 5] = [0.236_926_885_056_189, 0.478_628_670_499_366, 0.568_888_888_888_889, 0.478_628_670_499_366, 0.236_926_885_056_189];

/// `int_0^1 f_u(u) g(u) du` for quintic pieces.
fn gauss_area(f: &[f64], g: &[f64]) -> f64 {
    let df = pderiv(f);
    GL_NODES.iter().zip(GL_WEIGHTS).map(|(&x, w)| {
        let u = 0.5 * (x + 1.0);
        0.5 * w * peval(&df, u) * peval(g, u)
    }).sum()
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, depth)
}

/// Numbers certifying a constructed curve.
#[derive(Clone, Debug, PartialEq)]
pub struct ReachCertificate {
    /// Largest deviation of position and velocity from the requested endpoints.
    pub endpoint_error: f64,
    /// Oriented area `int f' g` by adaptive quadrature.
    pub area: f64,
    /// `|area - (z1 - z0)|`.
    pub area_residual: f64,
    /// Largest Euler-Lagrange residual along the curve.
    pub max_el_residual: f64,
    /// Largest `|z_dot - y x_dot|` over the samples.
    pub max_membership: f64,
    pub amplitude: f64,
}

#[derive(Clone, Debug)]
pub struct ReachCurve {
    pub trajectory: Trajectory,
    pub certificate: ReachCertificate,
}

struct Curve {
    hs: f64,
    f: Vec<Vec<f64>>,
    g: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
    z_start: Vec<f64>,
}

impl Curve {
    fn segment(&self, t: f64) -> (usize, f64) {
        let n = self.f.len();
        let k = ((t / self.hs) as usize).min(n - 1);
        (k, k as f64 * self.hs)
    }

    /// Positions `(x, y, z)` at `t` using the polynomials of segment `k`.
    fn local(&self, k: usize, start: f64, t: f64) -> [f64; 3] {
        let u = (t - start) / self.hs;
        [peval(&self.f[k], u), peval(&self.g[k], u), self.z_start[k] + peval(&self.z[k], u)]
    }

    fn velocity(&self, k: usize, start: f64, t: f64) -> [f64; 2] {
        let u = (t - start) / self.hs;
        [peval(&pderiv(&self.f[k]), u) / self.hs, peval(&pderiv(&self.g[k]), u) / self.hs]
    }
}

/// Joins two points of `{z_dot = y x_dot}` by a curve `(f, g, z0 + int f' g)`
/// on `t in [0, 1]`, sampled at `samples` points.
///
/// `(f, g)` is a piecewise quintic Hermite interpolant through the chord
/// between the endpoint positions, plus a multiple `A` of a closed loop
/// vanishing to second order at both ends; `A >= 0` is found by bracketing
/// and bisection so that the oriented area equals `z1 - z0`. Points are
/// `(x, y, z, x_dot, y_dot, z_dot)`.
pub fn reach_connect(
    m: &ModelSpec,
    el: &ElSystem,
    p0: [f64; 6],
    p1: [f64; 6],
    n_seg: usize,
    samples: usize,
) -> Result<ReachCurve, DynamicsError> {
    let [ix, iy, iz] = ["x", "y", "z"].map(|c| coord_index(m, c));
    let (ix, iy, iz) = (ix?, iy?, iz?);
    if m.dof() != 3 || n_seg == 0 || samples < 2 {
        return Err(DynamicsError::BadInput("need coordinates x, y, z, n_seg >= 1 and samples >= 2".to_string()));
    }
    if p0.iter().chain(&p1).any(|v| !v.is_finite()) {
        return Err(DynamicsError::BadInput("endpoints must be finite".to_string()));
    }
    for (which, p) in [("start", &p0), ("end", &p1)] {
        let residual = (p[5] - p[1] * p[3]).abs();
        if residual > TAU_EQ {
            return Err(DynamicsError::OffManifold { which, residual });
        }
    }
    let hs = 1.0 / n_seg as f64;
    let chord = [p1[0] - p0[0], p1[1] - p0[1]];
    let base: Vec<Knot> = (0..=n_seg)
        .map(|i| {
            let s = i as f64 * hs;
            let vel = if i == 0 {
                [p0[3], p0[4]]
            } else if i == n_seg {
                [p1[3], p1[4]]
            } else {
                chord
            };
            Knot { pos: [p0[0] + s * chord[0], p0[1] + s * chord[1]], vel, acc: [0.0; 2] }
        })
        .collect();
    let loop_knots = |sigma: f64| -> Vec<Knot> {
        (0..=n_seg)
            .map(|i| {
                if i == 0 || i == n_seg {
                    return Knot::default();
                }
                let th = 2.0 * PI * i as f64 * hs;
                let (s, c) = (libm::sin(th), libm::cos(th));
                Knot {
                    pos: [s, sigma * (1.0 - c)],
                    vel: [2.0 * PI * c, sigma * 2.0 * PI * s],
                    acc: [-4.0 * PI * PI * s, sigma * 4.0 * PI * PI * c],
                }
            })
            .collect()
    };
    let polys = |knots: &[Knot], c: usize| -> Vec<Vec<f64>> {
        (0..n_seg).map(|k| segment_poly(&knots[k], &knots[k + 1], hs, c)).collect()
    };
    let area_of = |fa: &[Vec<f64>], gb: &[Vec<f64>]| -> f64 { fa.iter().zip(gb).map(|(f, g)| gauss_area(f, g)).sum() };

    let target = p1[2] - p0[2];
    let (fb, gb) = (polys(&base, 0), polys(&base, 1));
    let i0 = area_of(&fb, &gb);
    let unit = loop_knots(1.0);
    let (fl, gl) = (polys(&unit, 0), polys(&unit, 1));
    let k_loop = area_of(&fl, &gl);
    let (amplitude, sigma) = if i0 == target {
        (0.0, 1.0)
    } else {
        if !(k_loop.abs() > 1e-12) {
            return Err(DynamicsError::NoBracket);
        }
        let sigma = if (target - i0) * k_loop >= 0.0 { 1.0 } else { -1.0 };
        let bump = loop_knots(sigma);
        let (f_bump, g_bump) = (polys(&bump, 0), polys(&bump, 1));
        let i1 = area_of(&fb, &g_bump) + area_of(&f_bump, &gb);
        let i2 = area_of(&f_bump, &g_bump);
        let phi = |a: f64| i0 + a * i1 + a * a * i2 - target;
        let (mut lo, mut hi) = (0.0, 1.0);
        let s0 = phi(0.0).signum();
        let mut doublings = 0;
        while phi(hi).signum() == s0 {
            lo = hi;
            hi *= 2.0;
            doublings += 1;
            if doublings > 200 || !hi.is_finite() {
                return Err(DynamicsError::NoBracket);
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if phi(mid).signum() == s0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let a = if phi(lo).abs() <= phi(hi).abs() { lo } else { hi };
        (a, sigma)
    };
    let bump = loop_knots(sigma);
    let knots: Vec<Knot> = base.iter().zip(&bump).map(|(b, l)| b.plus(&l.scaled(amplitude))).collect();
    let f = polys(&knots, 0);
    let g = polys(&knots, 1);
    let z: Vec<Vec<f64>> = f.iter().zip(&g).map(|(f, g)| pantideriv(&pmul(&pderiv(f), g))).collect();
    let mut z_start = Vec::with_capacity(n_seg);
    let mut acc = p0[2];
    for zk in &z {
        z_start.push(acc);
        acc += peval(zk, 1.0);
    }
    let curve = Curve { hs, f, g, z, z_start };

    // Independent area: adaptive Simpson on the Hermite basis form of f' g.
    let mut area = 0.0;
    for k in 0..n_seg {
        let (dx, dy) = (hermite_data(&knots[k], &knots[k + 1], hs, 0), hermite_data(&knots[k], &knots[k + 1], hs, 1));
        let integrand = |u: f64| {
            let mut fu = 0.0;
            let mut gv = 0.0;
            for b in 0..6 {
                let row = &HERMITE[b];
                let mut hb = 0.0;
                let mut dhb = 0.0;
                for j in (0..6).rev() {
                    hb = hb * u + row[j];
                    if j > 0 {
                        dhb = dhb * u + j as f64 * row[j];
                    }
                }
                fu += dx[b] * dhb;
                gv += dy[b] * hb;
            }
            fu * gv
        };
        area += adaptive_simpson(&integrand, 0.0, 1.0, 1e-14, 40);
    }

    let (res, _) = compiled_residuals(m, el)?;
    let h = 5e-4;
    let mut times = Vec::with_capacity(samples);
    let mut states = Vec::with_capacity(samples);
    let mut worst_el: f64 = 0.0;
    let mut worst_member: f64 = 0.0;
    let mut el_state = alloc::vec![0.0; 9];
    for i in 0..samples {
        let t = i as f64 / (samples - 1) as f64;
        let (k, start) = curve.segment(t);
        let pos = curve.local(k, start, t);
        let vel = curve.velocity(k, start, t);
        let zdot = vel[0] * pos[1];
        let mut s = alloc::vec![0.0; 6];
        s[ix] = pos[0];
        s[iy] = pos[1];
        s[iz] = pos[2];
        s[3 + ix] = vel[0];
        s[3 + iy] = vel[1];
        s[3 + iz] = zdot;
        worst_member = worst_member.max((zdot - pos[1] * vel[0]).abs());
        let pts: Vec<[f64; 3]> = (-2..=2).map(|j| curve.local(k, start, t + j as f64 * h)).collect();
        for (c, slot) in [(0, ix), (1, iy), (2, iz)] {
            let (q, v, a) = stencil([pts[0][c], pts[1][c], pts[2][c], pts[3][c], pts[4][c]], h);
            el_state[slot] = q;
            el_state[3 + slot] = v;
            el_state[6 + slot] = a;
        }
        worst_el = worst_el.max(max_residual(&res, &el_state));
        times.push(t);
        states.push(s);
    }
    let first = &states[0];
    let last = &states[samples - 1];
    let at = |s: &[f64]| [s[ix], s[iy], s[iz], s[3 + ix], s[3 + iy], s[3 + iz]];
    let endpoint_error = at(first)
        .iter()
        .zip(&p0)
        .chain(at(last).iter().zip(&p1))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let mut trajectory = path_trajectory(m, times, states);
    trajectory.monitor_names.push("membership".to_string());
    for (mon, s) in trajectory.monitors.iter_mut().zip(&trajectory.states) {
        mon.push(s[3 + iz] - s[iy] * s[3 + ix]);
    }
    let certificate = ReachCertificate {
        endpoint_error,
        area,
        area_residual: (area - target).abs(),
        max_el_residual: worst_el,
        max_membership: worst_member,
        amplitude,
    };
    Ok(ReachCurve { trajectory, certificate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::euler_lagrange_system;

    fn example_a() -> (ModelSpec, ElSystem) {
        let mut m = ModelSpec::new(&["x", "y", "z"]).unwrap();
        m.set_lagrangian("(z_dot - y*x_dot)^2/2").unwrap();
        let el = euler_lagrange_system(&m).unwrap();
        (m, el)
    }

    #[test]
    fn hermite_basis_interpolates() {
        let k0 = Knot { pos: [1.0, 2.0], vel: [3.0, 4.0], acc: [5.0, 6.0] };
        let k1 = Knot { pos: [-1.0, 0.5], vel: [0.0, -2.0], acc: [1.0, 0.0] };
        let hs = 0.25;
        let p = segment_poly(&k0, &k1, hs, 0);
        let d = pderiv(&p);
        let dd = pderiv(&d);
        assert!((peval(&p, 0.0) - 1.0).abs() < 1e-14 && (peval(&p, 1.0) + 1.0).abs() < 1e-14);
        assert!((peval(&d, 0.0) / hs - 3.0).abs() < 1e-13 && (peval(&d, 1.0) / hs).abs() < 1e-13);
        assert!((peval(&dd, 0.0) / (hs * hs) - 5.0).abs() < 1e-12 && (peval(&dd, 1.0) / (hs * hs) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_loop_of_area_five() {
        let (m, el) = example_a();
        let c = reach_connect(&m, &el, [0.0; 6], [0.0, 0.0, 5.0, 0.0, 0.0, 0.0], DEFAULT_SEGMENTS, 401).unwrap();
        assert!(c.certificate.area_residual < 1e-10, "{:?}", c.certificate);
        assert!(c.certificate.endpoint_error < 1e-8);
        assert!(c.certificate.max_el_residual < 1e-6, "{:?}", c.certificate);
    }

    #[test]
    fn constant_curve_and_errors() {
        let (m, el) = example_a();
        let p = [1.0, 2.0, 3.0, 0.0, 0.0, 0.0];
        let c = reach_connect(&m, &el, p, p, 4, 11).unwrap();
        assert_eq!(c.certificate.amplitude, 0.0);
        assert!(c.trajectory.states.iter().all(|s| s[..3] == p[..3]));
        assert!(matches!(reach_connect(&m, &el, [0.0; 6], [0.0, 0.0, 1.0, 0.0, 0.0, 0.0], 1, 11), Err(DynamicsError::NoBracket)));
        assert!(matches!(
            reach_connect(&m, &el, [0.0, 1.0, 0.0, 1.0, 0.0, 0.0], p, 4, 11),
            Err(DynamicsError::OffManifold { which: "start", .. })
        ));
    }

    #[test]
    fn gauge_family_closed_form() {
        let mut m = ModelSpec::new(&["w", "x", "y", "z"]).unwrap();
        m.set_lagrangian("((z_dot - y*x_dot)^2 + (y_dot - w*x_dot)^2)/2").unwrap();
        let el = euler_lagrange_system(&m).unwrap();
        let path = gauge_family(&m, libm::sin, |t| t * t, |t| 2.0 * t, 1.0, 1000).unwrap();
        let t = 1.0;
        let y = 2.0 * (libm::sin(t) - t * libm::cos(t));
        let z = 4.0 * (3.0 * libm::sin(t) - 3.0 * t * libm::cos(t) - t * t * libm::sin(t));
        assert!((path.positions[2][1000] - y).abs() < 1e-12);
        assert!((path.positions[3][1000] - z).abs() < 1e-12);
        assert!(stencil_el_residual(&m, &el, &path).unwrap() < 1e-5);
    }
}
