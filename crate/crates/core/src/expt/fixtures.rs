//! Reference values produced by `oracle/derive_fixtures.py` (mpmath, 30
//! digits, independent of this crate's quadrature and differencing).
//! Regenerate with that script rather than editing by hand.

/// `J_n = ∫ x^n sin(2π ln x) e^{-x²/2} dLN(0,1)` for n = 0..=6: the
/// Stieltjes perturbation paired with the unit-peak Gaussian kernel, s = 1.
pub const STIELTJES_KERNEL_BREAK: [f64; 7] = [
    0.0018112180047122059013,
    0.0044862367973067935866,
    0.0039546903781675135182,
    -0.0093925799759373703466,
    -0.053461104305775705556,
    -0.15794744705364922938,
    -0.35916610603397969275,
];

/// `(s, det G, cond G, correlation det)` for the Gaussian family at
/// θ = (1, 1), orders 0..=2, probability-normalized kernel centered at 0.
pub const SINGULAR_LIMIT: [[f64; 4]; 6] = [
    [1.0, 0.00036627873823026981574, 1.6231362658670496002, 0.98133333333333333333],
    [2.0, 0.00044906190031825002562, 3.4556415242881507264, 0.89495512141898152754],
    [5.0, 0.00010129272629876866761, 13.329098160321478529, 0.27012010907336438371],
    [10.0, 8.9919585010162775416e-6, 16.813018897589964559, 0.21575246051400569547],
    [30.0, 1.234320638833637181e-7, 18.035346469100484917, 0.20169559681484412107],
    [100.0, 1.011996774685380505e-9, 18.180602767980736454, 0.20015205423027910274],
];

/// `(w_0, κ_1, κ_2)` of Gaussian(0.7, 1.3) under the probability kernel
/// with s = 0.9, c = 0.2. The oracle also checks κ_1, κ_2 against the
/// Gaussian-product closed forms.
pub const TILTED_GAUSSIAN: [f64; 3] = [0.24000778968602719597, 0.362, 0.54756];
