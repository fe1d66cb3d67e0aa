use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{LayoutError, Result};
use crate::metrics::{ImpactType, RiiRow};
use crate::store::{ImpactMode, OutcomeKind};

/// Angular order of the belt sectors, clockwise from 12 o'clock.
pub const SECTOR_ORDER: [OutcomeKind; 5] = [
    OutcomeKind::Paper,
    OutcomeKind::Patent,
    OutcomeKind::ClinicalTrial,
    OutcomeKind::Policy,
    OutcomeKind::Newsfeed,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlyphMode {
    Historical,
    Prediction,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlyphConfig {
    pub t_min: f64,
    pub t_scale: f64,
    /// Largest |RII - 1| rendered; larger deviations are clamped.
    pub deviation_clamp: f64,
    /// Gap between the center circle and the innermost belt extent.
    pub ring_gap: f64,
    /// Prediction ring radius per square root of the high-score count.
    pub prediction_scale: f64,
}

impl Default for GlyphConfig {
    fn default() -> Self {
        GlyphConfig {
            t_min: 1.0,
            t_scale: 2.0,
            deviation_clamp: 4.0,
            ring_gap: 2.0,
            prediction_scale: 4.0,
        }
    }
}

impl GlyphConfig {
    fn max_thickness(&self) -> f64 {
        self.t_min + self.t_scale * self.deviation_clamp
    }
}

/// One sector of a ripple ring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Belt {
    pub impact_type: ImpactType,
    pub ring: ImpactMode,
    /// Clockwise from 12 o'clock, radians.
    pub start_angle: f64,
    pub end_angle: f64,
    /// +1 outside the baseline, -1 inside, 0 on it.
    pub offset_sign: i8,
    pub thickness: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// Color ramp position, 0 = darkest.
    pub color_index: u8,
    pub rii: Option<f64>,
    pub no_data: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RippleGlyphSpec {
    pub center_radius: f64,
    /// Dashed RII = 1 circles of the direct and the broad ring.
    pub baseline_radii: [f64; 2],
    pub belts: Vec<Belt>,
    pub mode: GlyphMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction_ring_radius: Option<f64>,
}

fn ring_dimensions(ring: ImpactMode) -> impl Iterator<Item = (usize, ImpactType)> {
    SECTOR_ORDER
        .into_iter()
        .enumerate()
        .filter_map(move |(k, kind)| ImpactType::for_cluster(ring, kind).map(|t| (k, t)))
}

/// Glyph of a grant topic node with `center_radius`. Historical glyphs
/// carry one belt per direct and broad dimension; prediction glyphs carry
/// only the ring for `high_score_count` grants.
pub fn ripple_glyph(
    center_radius: f64,
    rii: &RiiRow,
    mode: GlyphMode,
    high_score_count: Option<i64>,
    config: &GlyphConfig,
) -> Result<RippleGlyphSpec> {
    if center_radius.is_nan() || center_radius < 0.0 {
        return Err(LayoutError::Glyph(format!("negative center radius {center_radius}")));
    }
    let t_max = config.max_thickness();
    let direct = center_radius + config.ring_gap + t_max;
    let broad = direct + 2.0 * t_max + config.ring_gap;
    let mut spec = RippleGlyphSpec {
        center_radius,
        baseline_radii: [direct, broad],
        belts: Vec::new(),
        mode,
        prediction_ring_radius: None,
    };
    match mode {
        GlyphMode::Prediction => {
            let count = high_score_count.ok_or_else(|| LayoutError::Glyph("prediction mode needs a high-score count".into()))?;
            if count < 0 {
                return Err(LayoutError::Glyph(format!("negative high-score count {count}")));
            }
            spec.prediction_ring_radius = Some(config.prediction_scale * (count as f64).sqrt());
        }
        GlyphMode::Historical => {
            let sector = TAU / SECTOR_ORDER.len() as f64;
            for (ring, baseline, color_index) in [(ImpactMode::Direct, direct, 0u8), (ImpactMode::Broad, broad, 1u8)] {
                for (k, impact_type) in ring_dimensions(ring) {
                    let value = rii.get(&impact_type).copied().flatten();
                    let (sign, thickness) = match value {
                        Some(v) => {
                            let dev = v - 1.0;
                            let sign = if dev > 0.0 {
                                1
                            } else if dev < 0.0 {
                                -1
                            } else {
                                0
                            };
                            (sign, config.t_min + config.t_scale * dev.abs().min(config.deviation_clamp))
                        }
                        None => (0, config.t_min),
                    };
                    let (inner, outer) = if sign < 0 {
                        (baseline - thickness, baseline)
                    } else {
                        (baseline, baseline + thickness)
                    };
                    spec.belts.push(Belt {
                        impact_type,
                        ring,
                        start_angle: k as f64 * sector,
                        end_angle: (k + 1) as f64 * sector,
                        offset_sign: sign,
                        thickness,
                        inner_radius: inner,
                        outer_radius: outer,
                        color_index,
                        rii: value,
                        no_data: value.is_none(),
                    });
                }
            }
        }
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(value: Option<f64>) -> RiiRow {
        ImpactType::ALL.into_iter().map(|t| (t, value)).collect()
    }

    #[test]
    fn neutral_rii_hugs_baselines() {
        let g = ripple_glyph(10.0, &row(Some(1.0)), GlyphMode::Historical, None, &GlyphConfig::default()).unwrap();
        assert_eq!(g.belts.len(), 7);
        for b in &g.belts {
            assert_eq!(b.offset_sign, 0);
            assert_eq!(b.thickness, 1.0);
            let baseline = g.baseline_radii[if b.ring == ImpactMode::Direct { 0 } else { 1 }];
            assert_eq!(b.inner_radius, baseline);
        }
        assert!(g.prediction_ring_radius.is_none());
    }

    #[test]
    fn doubled_patent_rii_sits_outside() {
        let mut r = row(Some(1.0));
        r.insert(ImpactType::DirectPatent, Some(2.0));
        let g = ripple_glyph(10.0, &r, GlyphMode::Historical, None, &GlyphConfig::default()).unwrap();
        let b = g.belts.iter().find(|b| b.impact_type == ImpactType::DirectPatent).unwrap();
        assert_eq!(b.offset_sign, 1);
        assert_eq!(b.thickness, 1.0 + 2.0 * 1.0);
        assert_eq!(b.inner_radius, g.baseline_radii[0]);
        assert!((b.start_angle - TAU / 5.0).abs() < 1e-12);
    }

    #[test]
    fn undefined_rii_is_marked() {
        let g = ripple_glyph(5.0, &row(None), GlyphMode::Historical, None, &GlyphConfig::default()).unwrap();
        assert!(g.belts.iter().all(|b| b.no_data && b.offset_sign == 0));
    }

    #[test]
    fn prediction_rings_scale_with_sqrt_count() {
        let cfg = GlyphConfig::default();
        let a = ripple_glyph(5.0, &row(Some(1.0)), GlyphMode::Prediction, Some(9), &cfg).unwrap();
        let b = ripple_glyph(5.0, &row(Some(1.0)), GlyphMode::Prediction, Some(4), &cfg).unwrap();
        assert!(a.belts.is_empty());
        let ratio = a.prediction_ring_radius.unwrap() / b.prediction_ring_radius.unwrap();
        assert!((ratio - 1.5).abs() < 1e-12);
        assert!(ripple_glyph(5.0, &row(None), GlyphMode::Prediction, Some(-1), &cfg).is_err());
        assert!(ripple_glyph(5.0, &row(None), GlyphMode::Prediction, None, &cfg).is_err());
    }
}
