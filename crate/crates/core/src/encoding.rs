//! Visual encoding of attributions as colors.
//!
//! Topic vectors map to a categorical hue (argmax), optionally faded toward
//! white by normalized entropy. Scalar attributions map onto a diverging scale
//! that is white at zero. All interpolation is linear in RGB with
//! round-half-up per channel.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{channel, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Color {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Color {
    pub const WHITE: Color = Color::new(255, 255, 255);
    pub const BLACK: Color = Color::new(0, 0, 0);

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Color { r, g, b }
    }

    /// `#RRGGBB`, uppercase.
    pub fn hex(&self) -> String {
        self.to_string()
    }

    /// Channelwise `round(self + u·(other − self))`.
    pub fn lerp<T: Real>(self, other: Color, u: T) -> Color {
        let mix = |a: u8, b: u8| {
            let a = T::from_count(a as usize);
            let b = T::from_count(b as usize);
            channel(a + u * (b - a))
        };
        Color::new(mix(self.r, other.r), mix(self.g, other.g), mix(self.b, other.b))
    }

    pub fn to_rgb(self) -> [u8; 3] {
        [self.r, self.g, self.b]
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02X}{:02X}{:02X}", self.r, self.g, self.b)
    }
}

impl FromStr for Color {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let hex = s
            .strip_prefix('#')
            .filter(|h| h.len() == 6 && h.is_ascii())
            .ok_or_else(|| Error::InvalidConfig(format!("bad color {s:?}, expected #RRGGBB")))?;
        let part = |i: usize| {
            u8::from_str_radix(&hex[i..i + 2], 16)
                .map_err(|_| Error::InvalidConfig(format!("bad color {s:?}")))
        };
        Ok(Color::new(part(0)?, part(2)?, part(4)?))
    }
}

impl Serialize for Color {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.hex())
    }
}

impl<'de> Deserialize<'de> for Color {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Ten similar-brightness qualitative hues.
pub const DEFAULT_PALETTE: [Color; 10] = [
    Color::new(31, 119, 180),
    Color::new(255, 127, 14),
    Color::new(44, 160, 44),
    Color::new(214, 39, 40),
    Color::new(148, 103, 189),
    Color::new(140, 86, 75),
    Color::new(227, 119, 194),
    Color::new(127, 127, 127),
    Color::new(188, 189, 34),
    Color::new(23, 190, 207),
];

pub const DEFAULT_NEGATIVE: Color = Color::new(33, 102, 172);
pub const DEFAULT_POSITIVE: Color = Color::new(178, 24, 43);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalPalette {
    colors: Vec<Color>,
}

impl CategoricalPalette {
    pub fn new(colors: Vec<Color>) -> Result<Self> {
        if colors.is_empty() {
            return Err(Error::InvalidConfig("palette is empty".into()));
        }
        for (i, c) in colors.iter().enumerate() {
            if colors[..i].contains(c) {
                return Err(Error::InvalidConfig(format!("palette repeats {c}")));
            }
        }
        Ok(CategoricalPalette { colors })
    }

    /// `base` extended to `k` entries. Cycles (with a warning) when `k` exceeds
    /// the number of base colors, so topics beyond that share hues.
    pub fn for_topics(base: &[Color], k: usize) -> Result<Self> {
        if base.is_empty() {
            return Err(Error::InvalidConfig("palette is empty".into()));
        }
        if k > base.len() {
            log::warn!(
                "{k} topics but only {} palette colors; colors will repeat",
                base.len()
            );
        }
        let n = k.max(base.len());
        Ok(CategoricalPalette {
            colors: base.iter().copied().cycle().take(n).collect(),
        })
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }
}

impl Default for CategoricalPalette {
    fn default() -> Self {
        CategoricalPalette {
            colors: DEFAULT_PALETTE.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergingScale<T> {
    pub negative_color: Color,
    pub positive_color: Color,
    pub midpoint_color: Color,
    /// |ψ| at which the endpoint color is reached.
    pub scale_magnitude: T,
}

impl<T: Real> DivergingScale<T> {
    pub fn new(scale_magnitude: T) -> Result<Self> {
        Self::with_colors(DEFAULT_NEGATIVE, DEFAULT_POSITIVE, scale_magnitude)
    }

    pub fn with_colors(negative: Color, positive: Color, scale_magnitude: T) -> Result<Self> {
        if !(scale_magnitude > T::zero()) || !scale_magnitude.is_finite() {
            return Err(Error::InvalidConfig(
                "scale magnitude must be positive and finite".into(),
            ));
        }
        Ok(DivergingScale {
            negative_color: negative,
            positive_color: positive,
            midpoint_color: Color::WHITE,
            scale_magnitude,
        })
    }

    /// Same scale with the hue roles of the two signs exchanged.
    pub fn swapped(self) -> Self {
        DivergingScale {
            negative_color: self.positive_color,
            positive_color: self.negative_color,
            ..self
        }
    }
}

fn check_simplex<T: Real>(psi: &[T]) -> Result<()> {
    let tol = T::from_f64_lossy(1e-6);
    if psi.is_empty() {
        return Err(Error::NotInSimplex("empty vector".into()));
    }
    if psi.iter().any(|&p| !p.is_finite() || p < -tol) {
        return Err(Error::NotInSimplex(format!("{psi:?}")));
    }
    let total: T = psi.iter().copied().sum();
    if (total - T::one()).abs() > tol {
        return Err(Error::NotInSimplex(format!("sums to {total}")));
    }
    Ok(())
}

/// `H(ψ) / log K`, with `0 log 0 = 0`. Zero for `K = 1`.
pub fn normalized_entropy<T: Real>(psi: &[T]) -> Result<T> {
    check_simplex(psi)?;
    if psi.len() == 1 {
        return Ok(T::zero());
    }
    let h: T = psi
        .iter()
        .filter(|&&p| p > T::zero())
        .map(|&p| -p * p.ln())
        .sum();
    let max = T::from_count(psi.len()).ln();
    Ok((h / max).max(T::zero()).min(T::one()))
}

/// Palette color of the most probable topic (ties to the lowest index),
/// faded toward white by normalized entropy when `blend` is set.
pub fn encode_topic<T: Real>(psi: &[T], palette: &CategoricalPalette, blend: bool) -> Result<Color> {
    check_simplex(psi)?;
    if palette.len() < psi.len() {
        return Err(Error::InvalidConfig(format!(
            "palette has {} colors for {} topics",
            palette.len(),
            psi.len()
        )));
    }
    let mut best = 0;
    for (k, &p) in psi.iter().enumerate().skip(1) {
        if p > psi[best] {
            best = k;
        }
    }
    let base = palette.colors()[best];
    if !blend {
        return Ok(base);
    }
    Ok(base.lerp(Color::WHITE, normalized_entropy(psi)?))
}

pub fn encode_scalar<T: Real>(psi: T, scale: &DivergingScale<T>) -> Result<Color> {
    if !psi.is_finite() {
        return Err(Error::NonFinite(format!("attribution {psi}")));
    }
    let u = (psi / scale.scale_magnitude).max(-T::one()).min(T::one());
    Ok(if u == T::zero() {
        scale.midpoint_color
    } else if u > T::zero() {
        Color::WHITE.lerp(scale.positive_color, u)
    } else {
        Color::WHITE.lerp(scale.negative_color, -u)
    })
}

/// Nearest-rank `percentile` of |ψ| over the nonzero finite entries.
pub fn fit_scale<T: Real>(
    attributions: &[T],
    percentile: f64,
    negative: Color,
    positive: Color,
) -> Result<DivergingScale<T>> {
    if !(percentile > 0.0 && percentile <= 100.0) {
        return Err(Error::InvalidConfig("percentile must be in (0, 100]".into()));
    }
    let mut magnitudes: Vec<T> = attributions
        .iter()
        .filter(|x| x.is_finite() && **x != T::zero())
        .map(|x| x.abs())
        .collect();
    if magnitudes.is_empty() {
        return Err(Error::DegenerateAttribution);
    }
    magnitudes.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = magnitudes.len();
    let rank = ((percentile / 100.0) * n as f64).ceil() as usize;
    let value = magnitudes[rank.clamp(1, n) - 1];
    DivergingScale::with_colors(negative, positive, value)
}

/// Optional JSON override of the palette and diverging scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColorConfig {
    pub palette: Vec<Color>,
    pub negative: Color,
    pub positive: Color,
    pub percentile: f64,
    pub blend: bool,
}

impl Default for ColorConfig {
    fn default() -> Self {
        ColorConfig {
            palette: DEFAULT_PALETTE.to_vec(),
            negative: DEFAULT_NEGATIVE,
            positive: DEFAULT_POSITIVE,
            percentile: 95.0,
            blend: false,
        }
    }
}

impl ColorConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: ColorConfig = serde_json::from_str(&text)?;
        CategoricalPalette::new(config.palette.clone())?;
        if !(config.percentile > 0.0 && config.percentile <= 100.0) {
            return Err(Error::InvalidConfig("percentile must be in (0, 100]".into()));
        }
        Ok(config)
    }
}
