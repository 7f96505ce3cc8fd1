//! Masked categorical policy and the actor-critic loss of one sample.

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::Distribution;

use super::model::Mlp;

/// One action inside a sample: logits segment `slot`, chosen PE `action`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pick {
    pub slot: usize,
    pub action: usize,
    pub mask: Vec<bool>,
}

/// Softmax over the unmasked logits; masked entries get probability 0.
/// `None` when every entry is masked.
pub fn masked_softmax(logits: &[f64], mask: &[bool]) -> Option<Vec<f64>> {
    let max = logits
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&l, _)| l)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return None;
    }
    let mut p: Vec<f64> = logits
        .iter()
        .zip(mask)
        .map(|(&l, &m)| if m { (l - max).exp() } else { 0.0 })
        .collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= z);
    Some(p)
}

/// `-Σ p log p` over the support of `p`.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

pub fn sample_index<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    WeightedIndex::new(p).expect("a distribution with positive mass").sample(rng)
}

/// Most probable index, lowest on ties.
pub fn greedy_index(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in p.iter().enumerate() {
        if x > p[best] {
            best = i;
        }
    }
    best
}

/// Loss terms of one sample. `total = actor + critic - xi * entropy`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SampleLoss {
    pub actor: f64,
    pub critic: f64,
    pub entropy: f64,
    pub total: f64,
    pub value: f64,
}

/// Loss of one sample and, with `grad`, its parameter gradient scaled by
/// `weight` accumulated into `grad`.
///
/// The actor term is `-Σ log π(a) * advantage`; the advantage defaults to
/// `ret - V̂` and is treated as a constant. The critic term is
/// `½ (ret - V̂)²`.
pub fn sample_loss(
    model: &Mlp,
    x: &[f64],
    picks: &[Pick],
    ret: f64,
    advantage: Option<f64>,
    xi: f64,
    grad: Option<(&mut [f64], f64)>,
) -> SampleLoss {
    let fwd = model.forward(x);
    let v = fwd.value;
    let adv = advantage.unwrap_or(ret - v);
    let q = picks.first().map_or(0, |p| p.mask.len());
    let mut d_logits = vec![0.0; fwd.logits.len()];
    let (mut actor, mut ent) = (0.0, 0.0);
    for pick in picks {
        let seg = pick.slot * q..(pick.slot + 1) * q;
        let p = masked_softmax(&fwd.logits[seg.clone()], &pick.mask).expect("picks have a supported PE");
        let h = entropy(&p);
        actor -= p[pick.action].ln() * adv;
        ent += h;
        for (j, d) in d_logits[seg].iter_mut().enumerate() {
            if p[j] == 0.0 {
                continue;
            }
            let onehot = if j == pick.action { 1.0 } else { 0.0 };
            *d = -adv * (onehot - p[j]) + xi * p[j] * (p[j].ln() + h);
        }
    }
    let critic = 0.5 * (ret - v) * (ret - v);
    if let Some((g, weight)) = grad {
        d_logits.iter_mut().for_each(|d| *d *= weight);
        model.backward(x, &fwd, &d_logits, weight * (v - ret), g);
    }
    SampleLoss {
        actor,
        critic,
        entropy: ent,
        total: actor + critic - xi * ent,
        value: v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::model::Shape;
    use crate::seeding;

    #[test]
    fn masked_entries_get_zero_mass() {
        let p = masked_softmax(&[5.0, 1.0, 1.0], &[false, true, true]).unwrap();
        assert_eq!(p, [0.0, 0.5, 0.5]);
        assert!(masked_softmax(&[1.0], &[false]).is_none());
        let one = masked_softmax(&[0.3, 9.0], &[true, false]).unwrap();
        assert_eq!(one, [1.0, 0.0]);
        assert_eq!(entropy(&one), 0.0);
    }

    #[test]
    fn uniform_logits_sample_uniformly() {
        let p = masked_softmax(&[0.0; 4], &[true; 4]).unwrap();
        let mut rng = seeding::stream(2, seeding::SCHEDULER);
        let mut counts = [0usize; 4];
        let n = 100_000;
        for _ in 0..n {
            counts[sample_index(&p, &mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 0.01, "{counts:?}");
        }
    }

    #[test]
    fn zero_advantage_and_exact_value_give_zero_loss() {
        let shape = Shape { input: 3, hidden: 5, output: 2 };
        let m = Mlp::init(shape, &mut seeding::stream(0, seeding::INIT));
        let x = [0.2, -0.4, 1.0];
        let v = m.forward(&x).value;
        let picks = [Pick { slot: 0, action: 1, mask: vec![true, true] }];
        let l = sample_loss(&m, &x, &picks, v, None, 0.0, None);
        assert_eq!((l.actor, l.critic), (0.0, 0.0));
    }
}
