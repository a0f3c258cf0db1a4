//! Fixed SRM high-pass residual filters.
//!
//! The 30 kernels live in `assets/srm_kernels.txt`, embedded at compile time and
//! verified against a SHA-256 digest on load. Every kernel has integer taps that
//! sum to zero, stored on a 5×5 support, plus a divisor applied before filtering.
//!
//! Family split (3×3 support: 8 first-order, 4 second-order, 4 edge, 1 square;
//! 5×5 support: 8 third-order, 4 edge, 1 square):
//!
//! | subset         | members                                   | count |
//! |----------------|-------------------------------------------|-------|
//! | `first_order`  | first-order                               | 8     |
//! | `second_order` | second-order                              | 4     |
//! | `third_order`  | third-order                               | 8     |
//! | `all_3x3`      | first + second order, edge3x3, square3x3  | 17    |
//! | `all_5x5`      | third order, edge5x5, square5x5           | 13    |
//! | `all_30`       | everything                                | 30    |

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::tensor::{Real, Tensor4};

pub const KERNEL_ASSET: &str = include_str!("../assets/srm_kernels.txt");
pub const KERNEL_ASSET_SHA256: &str = "51522311927a80478f3b6a36e21c9e48b7c5ac4fa2be1313ad3724fb84af77f5";

/// Support size of every stored kernel; filtering pads by `SUPPORT / 2`.
pub const SUPPORT: usize = 5;
const RADIUS: usize = SUPPORT / 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    FirstOrder,
    SecondOrder,
    ThirdOrder,
    Edge3x3,
    Square3x3,
    Edge5x5,
    Square5x5,
}

impl KernelFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::FirstOrder => "first_order",
            Self::SecondOrder => "second_order",
            Self::ThirdOrder => "third_order",
            Self::Edge3x3 => "edge3x3",
            Self::Square3x3 => "square3x3",
            Self::Edge5x5 => "edge5x5",
            Self::Square5x5 => "square5x5",
        }
    }

    /// Whether the family fits a 3×3 support.
    pub fn is_3x3(self) -> bool {
        matches!(self, Self::FirstOrder | Self::SecondOrder | Self::Edge3x3 | Self::Square3x3)
    }

    /// Divisor applied to the integer taps.
    pub fn normalizer(self) -> i32 {
        match self {
            Self::FirstOrder => 1,
            Self::SecondOrder => 2,
            Self::ThirdOrder => 3,
            Self::Edge3x3 | Self::Square3x3 => 4,
            Self::Edge5x5 | Self::Square5x5 => 12,
        }
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "first_order" => Self::FirstOrder,
            "second_order" => Self::SecondOrder,
            "third_order" => Self::ThirdOrder,
            "edge3x3" => Self::Edge3x3,
            "square3x3" => Self::Square3x3,
            "edge5x5" => Self::Edge5x5,
            "square5x5" => Self::Square5x5,
            other => return Err(Error::unknown("kernel family", other)),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SrmKernel {
    pub name: String,
    pub family: KernelFamily,
    pub normalizer: i32,
    pub taps: [[i32; SUPPORT]; SUPPORT],
}

impl SrmKernel {
    pub fn tap_sum(&self) -> i32 {
        self.taps.iter().flatten().sum()
    }

    /// Normalized non-zero taps as `(dy, dx, weight)` offsets from the center.
    pub fn nonzero_taps(&self) -> Vec<(isize, isize, f64)> {
        let mut out = Vec::new();
        for (i, row) in self.taps.iter().enumerate() {
            for (j, &t) in row.iter().enumerate() {
                if t != 0 {
                    out.push((i as isize - RADIUS as isize, j as isize - RADIUS as isize, t as f64 / self.normalizer as f64));
                }
            }
        }
        out
    }
}

/// Named kernel subsets; `Kernel` selects a single kernel by name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FilterSubset {
    FirstOrder,
    SecondOrder,
    ThirdOrder,
    All3x3,
    All5x5,
    All30,
    Kernel(String),
}

impl FilterSubset {
    /// The subsets compared in the filter ablation, in table order.
    pub const ABLATION: [FilterSubset; 6] = [
        FilterSubset::FirstOrder,
        FilterSubset::SecondOrder,
        FilterSubset::ThirdOrder,
        FilterSubset::All3x3,
        FilterSubset::All5x5,
        FilterSubset::All30,
    ];

    pub fn contains(&self, k: &SrmKernel) -> bool {
        match self {
            Self::FirstOrder => k.family == KernelFamily::FirstOrder,
            Self::SecondOrder => k.family == KernelFamily::SecondOrder,
            Self::ThirdOrder => k.family == KernelFamily::ThirdOrder,
            Self::All3x3 => k.family.is_3x3(),
            Self::All5x5 => !k.family.is_3x3(),
            Self::All30 => true,
            Self::Kernel(name) => &k.name == name,
        }
    }
}

impl fmt::Display for FilterSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FirstOrder => f.write_str("first_order"),
            Self::SecondOrder => f.write_str("second_order"),
            Self::ThirdOrder => f.write_str("third_order"),
            Self::All3x3 => f.write_str("all_3x3"),
            Self::All5x5 => f.write_str("all_5x5"),
            Self::All30 => f.write_str("all_30"),
            Self::Kernel(name) => write!(f, "kernel:{name}"),
        }
    }
}

impl FromStr for FilterSubset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "first_order" | "1st" => Self::FirstOrder,
            "second_order" | "2nd" => Self::SecondOrder,
            "third_order" | "3rd" => Self::ThirdOrder,
            "all_3x3" | "3x3" => Self::All3x3,
            "all_5x5" | "5x5" => Self::All5x5,
            "all_30" | "all" => Self::All30,
            other => match other.strip_prefix("kernel:") {
                Some(name) if !name.is_empty() => Self::Kernel(name.to_owned()),
                _ => return Err(Error::unknown("filter subset", other)),
            },
        })
    }
}

impl TryFrom<String> for FilterSubset {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FilterSubset> for String {
    fn from(s: FilterSubset) -> String {
        s.to_string()
    }
}

/// Immutable bank of SRM kernels in asset order.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    kernels: Vec<SrmKernel>,
}

/// Loads and verifies the embedded 30-kernel bank.
pub fn load_bank() -> Result<FilterBank> {
    FilterBank::parse(KERNEL_ASSET, KERNEL_ASSET_SHA256)
}

impl FilterBank {
    /// Parses an asset after checking its SHA-256 against `expected_sha256`.
    pub fn parse(text: &str, expected_sha256: &str) -> Result<Self> {
        let digest = Sha256::digest(text.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        if hex != expected_sha256 {
            return Err(Error::AssetCorrupted(format!("sha256 {hex}, expected {expected_sha256}")));
        }
        let mut kernels: Vec<SrmKernel> = Vec::new();
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        while let Some(header) = lines.next() {
            let fields: Vec<&str> = header.split_whitespace().collect();
            let [tag, name, family, norm] = fields[..] else {
                return Err(Error::AssetCorrupted(format!("bad kernel header `{header}`")));
            };
            if tag != "kernel" {
                return Err(Error::AssetCorrupted(format!("expected `kernel`, found `{tag}`")));
            }
            let family: KernelFamily = family.parse().map_err(|_| Error::AssetCorrupted(format!("family `{family}`")))?;
            let normalizer: i32 = norm.parse().map_err(|_| Error::AssetCorrupted(format!("normalizer `{norm}`")))?;
            let mut taps = [[0i32; SUPPORT]; SUPPORT];
            for row in taps.iter_mut() {
                let line = lines.next().ok_or_else(|| Error::AssetCorrupted(format!("{name}: missing rows")))?;
                let vals: Vec<i32> = line
                    .split_whitespace()
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::AssetCorrupted(format!("{name}: bad row `{line}`")))?;
                if vals.len() != SUPPORT {
                    return Err(Error::AssetCorrupted(format!("{name}: row has {} taps", vals.len())));
                }
                row.copy_from_slice(&vals);
            }
            let k = SrmKernel { name: name.to_owned(), family, normalizer, taps };
            if k.tap_sum() != 0 || normalizer != family.normalizer() {
                return Err(Error::AssetCorrupted(format!("{name}: taps must sum to zero with the family divisor")));
            }
            if kernels.iter().any(|o| o.name == k.name) {
                return Err(Error::AssetCorrupted(format!("duplicate kernel {name}")));
            }
            kernels.push(k);
        }
        Ok(Self { kernels })
    }

    pub fn kernels(&self) -> &[SrmKernel] {
        &self.kernels
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn kernel(&self, name: &str) -> Option<&SrmKernel> {
        self.kernels.iter().find(|k| k.name == name)
    }

    /// Members of `subset` in bank order; errors when it selects nothing.
    pub fn members(&self, subset: &FilterSubset) -> Result<Vec<&SrmKernel>> {
        let m: Vec<_> = self.kernels.iter().filter(|k| subset.contains(k)).collect();
        if m.is_empty() {
            return Err(Error::unknown("filter subset", subset.to_string()));
        }
        Ok(m)
    }

    /// Filters each of R, G, B with every kernel in `subset`.
    ///
    /// Output channel `3·k + c` holds kernel `k` applied to input channel `c`
    /// (k0R, k0G, k0B, k1R, ...). Borders use reflect padding, stride 1.
    pub fn apply<T: Real>(&self, rgb: &Tensor4<T>, subset: &FilterSubset) -> Result<Tensor4<T>> {
        let d = rgb.dims();
        if d.c != 3 {
            return Err(Error::shape(format!("SRM filtering needs 3 input channels, got {}", d.c)));
        }
        if d.h < SUPPORT || d.w < SUPPORT {
            return Err(Error::shape(format!("SRM filtering needs at least {SUPPORT}×{SUPPORT} images, got {d}")));
        }
        let members = self.members(subset)?;
        // Integer taps first, normalizer last: a constant integer image then
        // cancels exactly.
        let taps: Vec<(Vec<(isize, isize, T)>, T)> = members
            .iter()
            .map(|k| {
                let mut t = Vec::new();
                for (i, row) in k.taps.iter().enumerate() {
                    for (j, &v) in row.iter().enumerate() {
                        if v != 0 {
                            t.push((i as isize - RADIUS as isize, j as isize - RADIUS as isize, T::from_f64_lossy(f64::from(v))));
                        }
                    }
                }
                (t, T::one() / T::from_f64_lossy(f64::from(k.normalizer)))
            })
            .collect();
        let rows = reflect_table(d.h);
        let cols = reflect_table(d.w);
        let plane = d.plane();
        let mut out = Tensor4::zeros([d.n, 3 * members.len(), d.h, d.w]);
        for n in 0..d.n {
            let src = rgb.sample(n);
            let dst = out.sample_mut(n);
            for (k, (ktaps, scale)) in taps.iter().enumerate() {
                for c in 0..3 {
                    let chan = &src[c * plane..(c + 1) * plane];
                    let o = &mut dst[(3 * k + c) * plane..(3 * k + c + 1) * plane];
                    for &(dy, dx, wgt) in ktaps {
                        for y in 0..d.h {
                            let sy = rows[(y as isize + dy + RADIUS as isize) as usize];
                            let src_row = &chan[sy * d.w..(sy + 1) * d.w];
                            let out_row = &mut o[y * d.w..(y + 1) * d.w];
                            for (x, ov) in out_row.iter_mut().enumerate() {
                                *ov += wgt * src_row[cols[(x as isize + dx + RADIUS as isize) as usize]];
                            }
                        }
                    }
                    for v in o.iter_mut() {
                        *v *= *scale;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Human-readable listing of every kernel.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for k in &self.kernels {
            let _ = writeln!(s, "{} family={} normalizer={}", k.name, k.family.as_str(), k.normalizer);
            for row in &k.taps {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:4}")).collect();
                let _ = writeln!(s, "  {}", cells.join(""));
            }
        }
        s
    }
}

/// Source index for each padded coordinate `-RADIUS..len+RADIUS`, mirrored
/// without repeating the edge sample.
fn reflect_table(len: usize) -> Vec<usize> {
    (-(RADIUS as isize)..(len + RADIUS) as isize)
        .map(|i| {
            let last = len as isize - 1;
            let r = if i < 0 { -i } else if i > last { 2 * last - i } else { i };
            r as usize
        })
        .collect()
}

/// Convenience wrapper over [`FilterBank::apply`].
pub fn apply_bank<T: Real>(bank: &FilterBank, rgb: &Tensor4<T>, subset: &FilterSubset) -> Result<Tensor4<T>> {
    bank.apply(rgb, subset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bank_has_thirty_zero_sum_kernels() {
        let bank = load_bank().unwrap();
        assert_eq!(bank.len(), 30);
        assert!(bank.kernels().iter().all(|k| k.tap_sum() == 0));
    }

    #[test]
    fn subset_cardinalities() {
        let bank = load_bank().unwrap();
        let sizes: Vec<usize> =
            FilterSubset::ABLATION.iter().map(|s| bank.members(s).unwrap().len()).collect();
        assert_eq!(sizes, [8, 4, 8, 17, 13, 30]);
    }

    #[test]
    fn corrupted_asset_is_rejected() {
        let tampered = KERNEL_ASSET.replacen("-1   1", "-1   2", 1);
        assert!(matches!(FilterBank::parse(&tampered, KERNEL_ASSET_SHA256), Err(Error::AssetCorrupted(_))));
    }

    #[test]
    fn subset_names_round_trip() {
        for s in FilterSubset::ABLATION.iter().cloned().chain([FilterSubset::Kernel("square5x5".into())]) {
            assert_eq!(s.to_string().parse::<FilterSubset>().unwrap(), s);
        }
        assert!("bogus".parse::<FilterSubset>().is_err());
    }

    #[test]
    fn horizontal_difference_on_ramp_is_one() {
        let bank = load_bank().unwrap();
        let img = Tensor4::<f64>::from_fn([1, 3, 8, 10], |_, _, _, x| x as f64);
        let out = bank.apply(&img, &FilterSubset::Kernel("first_order_e".into())).unwrap();
        for c in 0..3 {
            for y in 0..8 {
                for x in 0..9 {
                    assert_eq!(out.at(0, c, y, x), 1.0);
                }
            }
        }
    }

    #[test]
    fn reflect_padding_mirrors_without_edge_repeat() {
        assert_eq!(reflect_table(5), vec![2, 1, 0, 1, 2, 3, 4, 3, 2]);
    }

    #[test]
    fn needs_rgb() {
        let bank = load_bank().unwrap();
        let x = Tensor4::<f32>::zeros([1, 1, 8, 8]);
        assert!(bank.apply(&x, &FilterSubset::All30).is_err());
    }
}
