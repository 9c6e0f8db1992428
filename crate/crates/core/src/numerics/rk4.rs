/// One classical fourth-order Runge–Kutta step of `ṡ = f(t, s)`.
pub fn rk4_step<const N: usize, F>(mut f: F, t: f64, s: &[f64; N], h: f64) -> [f64; N]
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let half = 0.5 * h;
    let k1 = f(t, s);
    let k2 = f(t + half, &axpy(s, half, &k1));
    let k3 = f(t + half, &axpy(s, half, &k2));
    let k4 = f(t + h, &axpy(s, h, &k3));
    let mut out = *s;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

#[inline]
fn axpy<const N: usize>(s: &[f64; N], a: f64, d: &[f64; N]) -> [f64; N] {
    let mut out = *s;
    for (o, di) in out.iter_mut().zip(d) {
        *o += a * di;
    }
    out
}
