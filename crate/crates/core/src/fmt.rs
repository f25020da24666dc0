//! Fixed-point float formatting used by every text format we write.

/// Six decimals, no exponent, and never `-0.000000`.
pub fn f6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.bytes().all(|b| matches!(b, b'-' | b'0' | b'.')) {
        "0.000000".to_string()
    } else {
        s
    }
}

/// Space separated triple, as used by URDF attributes and OBJ/PLY rows.
pub fn f6_triple(v: [f64; 3]) -> String {
    format!("{} {} {}", f6(v[0]), f6(v[1]), f6(v[2]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_zero_is_folded() {
        assert_eq!(f6(-1e-9), "0.000000");
        assert_eq!(f6(-0.0), "0.000000");
        assert_eq!(f6(-0.5), "-0.500000");
        assert_eq!(f6(std::f64::consts::FRAC_PI_2), "1.570796");
        assert_eq!(f6(1e20), "100000000000000000000.000000");
    }
}
