use serde::Serialize;

/// Generic-position moment counts for a `p`-parameter model observed
/// through `K + 1` weak moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ThresholdReport {
    pub p: usize,
    pub k: usize,
    /// `K + 1 > 2p`: the self-intersection stratum is missed generically.
    pub identifiability_generic: bool,
    /// `K + 1 > 2p − 1`: the rank-drop stratum Σ¹ is missed generically.
    pub info_regular_generic: bool,
    pub self_intersection_codim: i64,
    /// `K + 1 − p + 1`
    pub sigma1_codim: i64,
}

pub fn codimension_thresholds(p: usize, k: usize) -> ThresholdReport {
    let n = k as i64 + 1;
    let p_i = p as i64;
    ThresholdReport {
        p,
        k,
        identifiability_generic: n > 2 * p_i,
        info_regular_generic: n > 2 * p_i - 1,
        self_intersection_codim: n,
        sigma1_codim: n - p_i + 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_parameters_eight_moments() {
        let r = codimension_thresholds(3, 7);
        assert!(r.identifiability_generic);
        assert!(r.info_regular_generic);
        assert_eq!(r.self_intersection_codim, 8);
        assert_eq!(r.sigma1_codim, 6);
    }

    #[test]
    fn boundaries_are_strict() {
        assert!(!codimension_thresholds(3, 5).identifiability_generic);
        let r = codimension_thresholds(1, 1);
        assert!(!r.identifiability_generic);
        assert!(r.info_regular_generic);
    }

    #[test]
    fn flags_follow_inequalities() {
        for p in 1..8 {
            for k in 0..20 {
                let r = codimension_thresholds(p, k);
                assert_eq!(r.identifiability_generic, k + 1 > 2 * p);
                assert_eq!(r.info_regular_generic, k + 2 > 2 * p);
                assert_eq!(r.sigma1_codim, k as i64 + 2 - p as i64);
            }
        }
    }
}
