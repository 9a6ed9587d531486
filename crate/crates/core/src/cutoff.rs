//! Smooth cutoff profiles shared by the density integrals and the identity
//! suite, with the analytic bound on their first two derivatives.

/// Quintic smoothstep `S(u) = u³(10 − 15u + 6u²)`.
#[inline]
pub fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
}

/// `step(s)`: 1 on `(-∞, 1]`, strictly decreasing on `[1, 2]`, 0 on `[2, ∞)`.
#[inline]
pub fn cutoff_profile(s: f64) -> f64 {
    1.0 - smoothstep(s - 1.0)
}

/// Shifted family profile: 1 on `(-∞, j]`, 0 on `[j+1, ∞)`. The transition
/// shape, and hence the derivative bound, does not depend on `j`.
#[inline]
pub fn cutoff_profile_family(s: f64, j: u32) -> f64 {
    1.0 - smoothstep(s - j as f64)
}

/// Analytic bound `C' = sup (|step'| + |step''|)` of the quintic profile.
///
/// On the unit transition the supremum of `S' + |S''|` is attained at the
/// root of `2u³ + 3u² − 5u + 1` in (0, 1/2); Newton from 0.25 converges in a
/// handful of steps.
pub fn cutoff_c_prime() -> f64 {
    let mut u = 0.25f64;
    for _ in 0..20 {
        let p = 2.0 * u * u * u + 3.0 * u * u - 5.0 * u + 1.0;
        let dp = 6.0 * u * u + 6.0 * u - 5.0;
        u -= p / dp;
    }
    let sp = 30.0 * u * u * (1.0 - u) * (1.0 - u);
    let spp = (60.0 * u * (2.0 * u - 1.0) * (u - 1.0)).abs();
    sp + spp
}
