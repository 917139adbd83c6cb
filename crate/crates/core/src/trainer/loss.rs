/// Squared error and its derivative with respect to the prediction.
#[inline]
pub fn mse_loss(pred: f64, label: f64) -> (f64, f64) {
    let diff = pred - label;
    (diff * diff, 2.0 * diff)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginLoss {
    pub loss: f64,
    pub d_pos: f64,
    pub d_neg: f64,
}

/// `max(0, Δ − s_pos + s_neg)`; the subgradient at the kink is zero.
#[inline]
pub fn margin_rank_loss(s_pos: f64, s_neg: f64, margin: f64) -> MarginLoss {
    let v = margin - s_pos + s_neg;
    if v > 0.0 {
        MarginLoss {
            loss: v,
            d_pos: -1.0,
            d_neg: 1.0,
        }
    } else {
        MarginLoss {
            loss: 0.0,
            d_pos: 0.0,
            d_neg: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_examples() {
        assert_eq!(mse_loss(2.5, 2.5), (0.0, 0.0));
        assert_eq!(mse_loss(3.0, 5.0), (4.0, -4.0));
        // batch mean over three hand-set pairs: (1 + 0.25 + 4) / 3
        let batch = [(2.0, 1.0), (4.5, 5.0), (1.0, 3.0)];
        let mean: f64 = batch.iter().map(|&(p, l)| mse_loss(p, l).0).sum::<f64>() / 3.0;
        assert!((mean - 5.25 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn margin_examples() {
        assert_eq!(margin_rank_loss(1.0, 0.2, 0.5).loss, 0.0);
        assert_eq!(margin_rank_loss(0.75, 0.25, 0.5).loss, 0.0);
        assert_eq!(margin_rank_loss(0.3, 0.3, 0.5).loss, 0.5);
        assert!((margin_rank_loss(0.6, 0.4, 0.5).loss - 0.3).abs() < 1e-12);
        let kink = margin_rank_loss(0.5, 0.0, 0.5);
        assert_eq!((kink.d_pos, kink.d_neg), (0.0, 0.0));
    }
}
