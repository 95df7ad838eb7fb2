#![allow(dead_code)]

pub mod oracle;

use num_bigint::BigInt;
use num_rational::BigRational;
use voxfact::{Preset, Scalar};

pub fn presets() -> Vec<(Preset, oracle::Algebra)> {
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let one = BigRational::from_integer(BigInt::from(1));
    vec![
        (Preset::heisenberg(), oracle::Algebra::new(oracle::Kind::Heisenberg)),
        (Preset::virasoro(Scalar::from_ratio(1, 2)).unwrap(), oracle::Algebra::new(oracle::Kind::Virasoro(half))),
        (Preset::affine_sl2(Scalar::one()).unwrap(), oracle::Algebra::new(oracle::Kind::Sl2(one))),
    ]
}
