//! Trigonometric nodal approximations.
//!
//! Every function receives the precomputed sines and cosines of the
//! normalized coordinates `u = 2π·s` and returns `(value, ∂F/∂u)`.

pub(super) struct Trig {
    s: [f64; 3],
    c: [f64; 3],
    s2: [f64; 3],
    c2: [f64; 3],
}

impl Trig {
    pub(super) fn new(u: [f64; 3]) -> Self {
        let mut s = [0.0; 3];
        let mut c = [0.0; 3];
        let mut s2 = [0.0; 3];
        let mut c2 = [0.0; 3];
        for i in 0..3 {
            let (si, ci) = u[i].sin_cos();
            let (s2i, c2i) = (2.0 * u[i]).sin_cos();
            s[i] = si;
            c[i] = ci;
            s2[i] = s2i;
            c2[i] = c2i;
        }
        Trig { s, c, s2, c2 }
    }
}

type Eval = (f64, [f64; 3]);

/// `sin x·cos y + sin y·cos z + sin z·cos x`
pub(super) fn gyroid(t: &Trig) -> Eval {
    let [sx, sy, sz] = t.s;
    let [cx, cy, cz] = t.c;
    (
        sx * cy + sy * cz + sz * cx,
        [cx * cy - sz * sx, cy * cz - sx * sy, cz * cx - sy * sz],
    )
}

/// `cos x + cos y + cos z`
pub(super) fn schwarz_p(t: &Trig) -> Eval {
    let [sx, sy, sz] = t.s;
    let [cx, cy, cz] = t.c;
    (cx + cy + cz, [-sx, -sy, -sz])
}

/// `sin x·sin y·sin z + sin x·cos y·cos z + cos x·sin y·cos z + cos x·cos y·sin z`
pub(super) fn diamond(t: &Trig) -> Eval {
    let [sx, sy, sz] = t.s;
    let [cx, cy, cz] = t.c;
    (
        sx * sy * sz + sx * cy * cz + cx * sy * cz + cx * cy * sz,
        [
            cx * sy * sz + cx * cy * cz - sx * sy * cz - sx * cy * sz,
            sx * cy * sz - sx * sy * cz + cx * cy * cz - cx * sy * sz,
            sx * sy * cz - sx * cy * sz - cx * sy * sz + cx * cy * cz,
        ],
    )
}

/// `3(cos x + cos y + cos z) + 4·cos x·cos y·cos z`
pub(super) fn neovius(t: &Trig) -> Eval {
    let [sx, sy, sz] = t.s;
    let [cx, cy, cz] = t.c;
    (
        3.0 * (cx + cy + cz) + 4.0 * cx * cy * cz,
        [
            -3.0 * sx - 4.0 * sx * cy * cz,
            -3.0 * sy - 4.0 * cx * sy * cz,
            -3.0 * sz - 4.0 * cx * cy * sz,
        ],
    )
}

/// `2(cos x·cos y + cos y·cos z + cos z·cos x) − (cos 2x + cos 2y + cos 2z)`
pub(super) fn iwp(t: &Trig) -> Eval {
    let [sx, sy, sz] = t.s;
    let [cx, cy, cz] = t.c;
    let [s2x, s2y, s2z] = t.s2;
    let [c2x, c2y, c2z] = t.c2;
    (
        2.0 * (cx * cy + cy * cz + cz * cx) - (c2x + c2y + c2z),
        [
            -2.0 * sx * (cy + cz) + 2.0 * s2x,
            -2.0 * sy * (cx + cz) + 2.0 * s2y,
            -2.0 * sz * (cx + cy) + 2.0 * s2z,
        ],
    )
}

// Building blocks shared by the double-frequency surfaces.

/// `sin 2x·cos y·sin z + sin 2y·cos z·sin x + sin 2z·cos x·sin y`
fn mixed(t: &Trig) -> Eval {
    let [sx, sy, sz] = t.s;
    let [cx, cy, cz] = t.c;
    let [s2x, s2y, s2z] = t.s2;
    let [c2x, c2y, c2z] = t.c2;
    (
        s2x * cy * sz + s2y * cz * sx + s2z * cx * sy,
        [
            2.0 * c2x * cy * sz + s2y * cz * cx - s2z * sx * sy,
            -s2x * sy * sz + 2.0 * c2y * cz * sx + s2z * cx * cy,
            s2x * cy * cz - s2y * sz * sx + 2.0 * c2z * cx * sy,
        ],
    )
}

/// `cos 2x·cos 2y + cos 2y·cos 2z + cos 2z·cos 2x`
fn double_pairs(t: &Trig) -> Eval {
    let [s2x, s2y, s2z] = t.s2;
    let [c2x, c2y, c2z] = t.c2;
    (
        c2x * c2y + c2y * c2z + c2z * c2x,
        [
            -2.0 * s2x * (c2y + c2z),
            -2.0 * s2y * (c2x + c2z),
            -2.0 * s2z * (c2x + c2y),
        ],
    )
}

/// `cos 2x + cos 2y + cos 2z`
fn double_sum(t: &Trig) -> Eval {
    let [s2x, s2y, s2z] = t.s2;
    let [c2x, c2y, c2z] = t.c2;
    (c2x + c2y + c2z, [-2.0 * s2x, -2.0 * s2y, -2.0 * s2z])
}

fn combine(terms: &[(f64, Eval)], constant: f64) -> Eval {
    let mut value = constant;
    let mut grad = [0.0; 3];
    for (w, (v, g)) in terms {
        value += w * v;
        for i in 0..3 {
            grad[i] += w * g[i];
        }
    }
    (value, grad)
}

/// `0.5·mixed − 0.5·double_pairs + 0.15`
pub(super) fn lidinoid(t: &Trig) -> Eval {
    combine(&[(0.5, mixed(t)), (-0.5, double_pairs(t))], 0.15)
}

/// `1.1·mixed − 0.2·double_pairs − 0.4·double_sum`
pub(super) fn split_p(t: &Trig) -> Eval {
    combine(
        &[(1.1, mixed(t)), (-0.2, double_pairs(t)), (-0.4, double_sum(t))],
        0.0,
    )
}

/// `2.75·mixed − double_pairs`
pub(super) fn double_gyroid(t: &Trig) -> Eval {
    combine(&[(2.75, mixed(t)), (-1.0, double_pairs(t))], 0.0)
}

/// `0.5(sin x·sin y·sin z + cos x·cos y·cos z) − 0.5·double_pairs − 0.2`
pub(super) fn d_prime(t: &Trig) -> Eval {
    let [sx, sy, sz] = t.s;
    let [cx, cy, cz] = t.c;
    let triple = (
        sx * sy * sz + cx * cy * cz,
        [
            cx * sy * sz - sx * cy * cz,
            sx * cy * sz - cx * sy * cz,
            sx * sy * cz - cx * cy * sz,
        ],
    );
    combine(&[(0.5, triple), (-0.5, double_pairs(t))], -0.2)
}

/// `4(cos x·cos y + cos y·cos z + cos z·cos x) − 3·cos x·cos y·cos z + 2.4`
pub(super) fn pw_hybrid(t: &Trig) -> Eval {
    let [sx, sy, sz] = t.s;
    let [cx, cy, cz] = t.c;
    (
        4.0 * (cx * cy + cy * cz + cz * cx) - 3.0 * cx * cy * cz + 2.4,
        [
            -4.0 * sx * (cy + cz) + 3.0 * sx * cy * cz,
            -4.0 * sy * (cx + cz) + 3.0 * cx * sy * cz,
            -4.0 * sz * (cx + cy) + 3.0 * cx * cy * sz,
        ],
    )
}

/// `exp(z̃)·cos x − cos y`, with `z̃` the unwrapped fractional height.
pub(super) fn scherk_1(t: &Trig, frac: [f64; 3]) -> Eval {
    let [sx, sy, _] = t.s;
    let [cx, cy, _] = t.c;
    let e = frac[2].exp();
    (
        e * cx - cy,
        [-e * sx, sy, e * cx / std::f64::consts::TAU],
    )
}

/// `sin z − sinh x̃·sinh ỹ`, with `x̃, ỹ` the unwrapped fractional coordinates.
pub(super) fn scherk_2(t: &Trig, frac: [f64; 3]) -> Eval {
    let (shx, chx) = (frac[0].sinh(), frac[0].cosh());
    let (shy, chy) = (frac[1].sinh(), frac[1].cosh());
    let tau = std::f64::consts::TAU;
    (
        t.s[2] - shx * shy,
        [-chx * shy / tau, -shx * chy / tau, t.c[2]],
    )
}
