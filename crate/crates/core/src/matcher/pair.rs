//! Per-shot comparison: duration gate, lattice projections and KL scores.

use super::{MatchConfig, ShotSignature};
use crate::error::{Error, Result};
use crate::lattice::{
    color_leq, dominant_concepts, path_col, path_tex, select_order, texture_leq, to_dominant_form,
    ColorOrder, Completion, DominantColorForm, DominantSet, TextureLatticePoint,
};

pub const KL_EPSILON: f64 = 1e-6;

pub fn duration_match(d_q: u64, d_i: u64, cfg: &MatchConfig) -> bool {
    (d_q.abs_diff(d_i) as f64) <= cfg.tau_abs_ms.max(cfg.tau_rel * d_q as f64)
}

/// `KL(q || p)` where `q` is uniform over the query's present concepts and
/// `p` the index probabilities, both floored at [`KL_EPSILON`] and
/// renormalized.
pub fn cpt_match_kl<const K: usize>(
    query_present: &[bool; K],
    index_probs: &[f64; K],
) -> Result<f64> {
    let n_present = query_present.iter().filter(|p| **p).count();
    if n_present == 0 {
        return Err(Error::InvalidArgument(
            "query has no present concept".into(),
        ));
    }
    if index_probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidArgument(
            "index probability outside [0,1]".into(),
        ));
    }
    let q = query_present.map(|p| {
        if p {
            1.0 / n_present as f64
        } else {
            KL_EPSILON
        }
    });
    let q_sum: f64 = q.iter().sum();
    let p = index_probs.map(|p| p.max(KL_EPSILON));
    let p_sum: f64 = p.iter().sum();
    let kl: f64 = q
        .iter()
        .zip(&p)
        .map(|(&qk, &pk)| {
            let (qk, pk) = (qk / q_sum, pk / p_sum);
            qk * (qk / pk).ln()
        })
        .sum();
    Ok(kl.max(0.0))
}

/// Query-side data reused across every comparison with one query shot.
#[derive(Debug, Clone)]
pub struct PreparedQueryShot {
    pub duration_ms: u64,
    pub dominant: DominantSet,
    pub form: DominantColorForm,
    pub texture: TextureLatticePoint,
}

impl PreparedQueryShot {
    pub fn new(shot: &ShotSignature, cfg: &MatchConfig) -> Result<Self> {
        let dominant = dominant_concepts(&shot.color, cfg.q_step)?;
        let form = to_dominant_form(
            &shot.color,
            &dominant,
            cfg.q_step,
            Completion::RepairLargest,
        )?;
        Ok(PreparedQueryShot {
            duration_ms: shot.duration_ms,
            dominant,
            form,
            texture: TextureLatticePoint::from(&shot.texture),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairScore {
    pub matched: bool,
    pub kl_col: f64,
    pub kl_tex: f64,
    pub path_col: f64,
    pub path_tex: u32,
    pub order: ColorOrder,
}

pub(crate) fn score_prepared(
    q: &PreparedQueryShot,
    i: &ShotSignature,
    cfg: &MatchConfig,
) -> Result<PairScore> {
    let i_form = to_dominant_form(&i.color, &q.dominant, cfg.q_step, Completion::RepairLargest)?;
    let i_tex = TextureLatticePoint::from(&i.texture);
    let order = select_order(&q.form, &i_form);
    let matched = duration_match(q.duration_ms, i.duration_ms, cfg)
        && texture_leq(&i_tex, &q.texture)
        && color_leq(&i_form, &q.form, order)?;
    Ok(PairScore {
        matched,
        kl_col: cpt_match_kl(&q.dominant, &i.color.probabilities())?,
        kl_tex: cpt_match_kl(&q.texture.bits, &i.texture.prob)?,
        path_col: path_col(&q.form, &i_form)?,
        path_tex: path_tex(&i_tex, &q.texture),
        order,
    })
}

/// Compares one query shot with one index shot.
pub fn shot_pair_match(
    q: &ShotSignature,
    i: &ShotSignature,
    cfg: &MatchConfig,
) -> Result<PairScore> {
    score_prepared(&PreparedQueryShot::new(q, cfg)?, i, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::{ColorConceptId, ColorSignature};
    use crate::texture::{TextureConceptId, TextureSignature};
    use proptest::prelude::*;

    fn shot(d: u64, color: ColorConceptId, tex: &[TextureConceptId]) -> ShotSignature {
        let mut pct = [0.0; 11];
        pct[color.index()] = 100.0;
        ShotSignature {
            duration_ms: d,
            color: ColorSignature::new(pct).unwrap(),
            texture: TextureSignature::from_concepts(tex),
        }
    }

    #[test]
    fn duration_examples() {
        let cfg = MatchConfig::default();
        assert!(duration_match(1000, 1000, &cfg));
        assert!(duration_match(1000, 1049, &cfg));
        assert!(!duration_match(1000, 1200, &cfg));
        assert!(duration_match(4000, 4190, &cfg));
        assert!(!duration_match(4000, 4210, &cfg));
    }

    #[test]
    fn kl_examples() {
        let mut lined = [false; 11];
        lined[TextureConceptId::Lined.index()] = true;
        let mut p = [0.0; 11];
        p[TextureConceptId::Lined.index()] = 1.0;
        assert!(cpt_match_kl(&lined, &p).unwrap() < 1e-4);
        let uniform = [1.0 / 11.0; 11];
        assert!((cpt_match_kl(&lined, &uniform).unwrap() - 11f64.ln()).abs() < 1e-3);
        assert!(cpt_match_kl(&[false; 11], &uniform).is_err());
        let all = [true; 11];
        assert!(cpt_match_kl(&all, &uniform).unwrap() < 1e-12);
    }

    #[test]
    fn pair_examples() {
        use ColorConceptId::*;
        use TextureConceptId::*;
        let cfg = MatchConfig::default();
        let q = shot(1000, Black, &[Lined]);
        let s = shot_pair_match(&q, &q, &cfg).unwrap();
        assert!(s.matched);
        assert!(s.kl_col < 1e-4 && s.kl_tex < 1e-4);
        assert_eq!((s.path_col, s.path_tex), (0.0, 0));

        assert!(
            !shot_pair_match(&q, &shot(1000, Black, &[Spotted]), &cfg)
                .unwrap()
                .matched
        );
        assert!(
            shot_pair_match(&q, &shot(1000, Black, &[Lined, Spotted]), &cfg)
                .unwrap()
                .matched
        );
        assert!(
            !shot_pair_match(&q, &shot(2000, Black, &[Lined]), &cfg)
                .unwrap()
                .matched
        );
        assert!(
            !shot_pair_match(&q, &shot(1000, White, &[Lined]), &cfg)
                .unwrap()
                .matched
        );
    }

    proptest! {
        #[test]
        fn kl_non_negative(
            present in proptest::array::uniform11(any::<bool>()),
            p in proptest::array::uniform11(0.0f64..=1.0),
        ) {
            prop_assume!(present.iter().any(|b| *b));
            prop_assert!(cpt_match_kl(&present, &p).unwrap() >= 0.0);
        }
    }
}
