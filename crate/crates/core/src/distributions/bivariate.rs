//! Bivariate normal distribution function after Drezner and Wesolowsky
//! (1989), in the double precision form given by A. Genz (BVND).

use std::f64::consts::PI;

use super::normal::std_normal_cdf;
use crate::{Error, Result};

// (weight, node) pairs of Gauss-Legendre rules, negative half of [-1, 1].
const GL6: [(f64, f64); 3] = [
    (0.171_324_492_379_170_5, -0.932_469_514_203_152_2),
    (0.360_761_573_048_138_4, -0.661_209_386_466_264_7),
    (0.467_913_934_572_690_4, -0.238_619_186_083_197_0),
];
const GL12: [(f64, f64); 6] = [
    (0.047_175_336_386_511_77, -0.981_560_634_246_719_1),
    (0.106_939_325_995_318_3, -0.904_117_256_370_475_0),
    (0.160_078_328_543_346_4, -0.769_902_674_194_305_0),
    (0.203_167_426_723_065_9, -0.587_317_954_286_617_1),
    (0.233_492_536_538_354_7, -0.367_831_498_998_180_2),
    (0.249_147_045_813_402_9, -0.125_233_408_511_469_2),
];
const GL20: [(f64, f64); 10] = [
    (0.017_614_007_139_152_12, -0.993_128_599_185_094_9),
    (0.040_601_429_800_386_94, -0.963_971_927_277_913_8),
    (0.062_672_048_334_109_06, -0.912_234_428_251_325_9),
    (0.083_276_741_576_704_75, -0.839_116_971_822_218_8),
    (0.101_930_119_817_240_4, -0.746_331_906_460_150_8),
    (0.118_194_531_961_518_4, -0.636_053_680_726_515_0),
    (0.131_688_638_449_176_6, -0.510_867_001_950_827_1),
    (0.142_096_109_318_382_1, -0.373_706_088_715_419_6),
    (0.149_172_986_472_603_7, -0.227_785_851_141_645_1),
    (0.152_753_387_130_725_9, -0.076_526_521_133_497_33),
];

/// P[X ≤ x, Y ≤ y] for standard normal X, Y with correlation `rho`.
pub fn bivariate_normal_cdf(x: f64, y: f64, rho: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(Error::domain(format!("bivariate normal requires |rho| < 1, got {rho}")));
    }
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::domain("bivariate normal requires finite limits"));
    }
    Ok(upper_orthant(-x, -y, rho).clamp(0.0, 1.0))
}

/// P[X > h, Y > k].
fn upper_orthant(h: f64, k: f64, r: f64) -> f64 {
    let rule: &[(f64, f64)] = if r.abs() < 0.3 {
        &GL6
    } else if r.abs() < 0.75 {
        &GL12
    } else {
        &GL20
    };
    let hk = h * k;

    if r.abs() < 0.925 {
        let mut bvn = 0.0;
        if r != 0.0 {
            let hs = 0.5 * (h * h + k * k);
            let asr = r.asin();
            for &(w, node) in rule {
                for sign in [-1.0, 1.0] {
                    let sn = (0.5 * asr * (sign * node + 1.0)).sin();
                    bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
                }
            }
            bvn *= asr / (4.0 * PI);
        }
        return bvn + std_normal_cdf(-h) * std_normal_cdf(-k);
    }

    let (k, hk) = if r < 0.0 { (-k, -hk) } else { (k, hk) };
    let mut bvn = 0.0;
    let a2 = (1.0 - r) * (1.0 + r);
    let mut a = a2.sqrt();
    let b2 = (h - k) * (h - k);
    let b = b2.sqrt();
    let c = (4.0 - hk) / 8.0;
    let d = (12.0 - hk) / 16.0;
    let asr = -0.5 * (b2 / a2 + hk);
    if asr > -100.0 {
        bvn = a * asr.exp() * (1.0 - c * (b2 - a2) * (1.0 - d * b2 / 5.0) / 3.0 + c * d * a2 * a2 / 5.0);
    }
    if hk > -100.0 {
        bvn -= (-0.5 * hk).exp()
            * (2.0 * PI).sqrt()
            * std_normal_cdf(-b / a)
            * b
            * (1.0 - c * b2 * (1.0 - d * b2 / 5.0) / 3.0);
    }
    a *= 0.5;
    for &(w, node) in rule {
        for sign in [-1.0, 1.0] {
            let xs = (a * (sign * node + 1.0)).powi(2);
            let rs = (1.0 - xs).sqrt();
            let asr = -0.5 * (b2 / xs + hk);
            if asr > -100.0 {
                bvn += a
                    * w
                    * asr.exp()
                    * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs - (1.0 + c * xs * (1.0 + d * xs)));
            }
        }
    }
    bvn /= -2.0 * PI;
    if r > 0.0 {
        bvn + std_normal_cdf(-h.max(k))
    } else {
        let mut v = -bvn;
        if k > h {
            v += if h < 0.0 {
                std_normal_cdf(k) - std_normal_cdf(h)
            } else {
                std_normal_cdf(-h) - std_normal_cdf(-k)
            };
        }
        v
    }
}
