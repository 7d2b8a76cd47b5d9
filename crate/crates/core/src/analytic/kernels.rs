//! The bump `F`, the partition generator `G` and the window `V`.

/// `exp(-1/((x-1/2)(2-x)))` on `(1/2, 2)`, zero elsewhere.
pub fn bump_f(x: f64) -> f64 {
    if x <= 0.5 || x >= 2.0 {
        return 0.0;
    }
    (-1.0 / ((x - 0.5) * (2.0 - x))).exp()
}

pub const BUMP_SUPPORT: (f64, f64) = (0.5, 2.0);

/// Smooth step on `[0, 1]`: `e(s)/(e(s)+e(1-s))` with `e(s) = exp(-1/s)`.
fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        1.0 / (1.0 + (1.0 / s - 1.0 / (1.0 - s)).exp())
    }
}

/// Rises from 0 at `t = 3/4` to 1 at `t = 1`.
fn rho(t: f64) -> f64 {
    smooth_step(4.0 * (t - 0.75))
}

/// Partition generator supported on `[3/4, 2]`, equal to 1 on `[1, 3/2]`, with
/// `G(x) + G(x/2) = 1` on `[1, 3]`.
pub fn partition_g(x: f64) -> f64 {
    if x <= 0.75 || x >= 2.0 {
        0.0
    } else if x < 1.0 {
        rho(x)
    } else if x <= 1.5 {
        1.0
    } else {
        1.0 - rho(x / 2.0)
    }
}

/// `G(x/2) + G(x) + G(2x)`: one on `[1/2, 3]`, supported in `[3/8, 4]`.
pub fn window_v(x: f64) -> f64 {
    partition_g(x / 2.0) + partition_g(x) + partition_g(2.0 * x)
}
