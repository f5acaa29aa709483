//! Seeded one-factor market generator.
//!
//! Produces a positive price panel with slowly varying shares outstanding
//! from a one-factor return model: every stock loads on a common market
//! factor through its own beta and adds idiosyncratic noise. Both the
//! factor volatility and each stock's idiosyncratic volatility follow slow
//! mean-reverting log-volatility states with a leverage feedback (down
//! moves raise volatility), so rolling estimates genuinely decay with age.
//!
//! Identical seeds produce bit-identical panels.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::panel::PricePanel;

/// Shares outstanding step every quarter of trading days.
const SHARES_STEP_DAYS: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub stocks: usize,
    pub days: usize,
    pub seed: u64,
    /// Base daily volatility of the common factor.
    pub factor_vol: f64,
    /// Base scale for per-stock idiosyncratic volatilities.
    pub idio_vol: f64,
    /// AR(1) coefficient of the log-volatility states.
    pub vol_persistence: f64,
    /// Innovation standard deviation of the log-volatility states.
    pub vol_of_vol: f64,
    /// Feedback of a shock into the next day's log-volatility; negative
    /// returns push volatility up.
    pub leverage: f64,
    /// Common daily drift.
    pub drift: f64,
}

impl SyntheticConfig {
    pub fn new(stocks: usize, days: usize, seed: u64) -> Self {
        Self {
            stocks,
            days,
            seed,
            factor_vol: 0.009,
            idio_vol: 0.012,
            vol_persistence: 0.997,
            vol_of_vol: 0.03,
            leverage: 0.03,
            drift: 0.0003,
        }
    }
}

/// Trading dates skipping weekends, starting 2014-01-02.
pub fn business_days(count: usize) -> Vec<String> {
    fn is_leap(y: i32) -> bool {
        (y % 4 == 0 && y % 100 != 0) || y % 400 == 0
    }
    fn days_in_month(y: i32, m: u32) -> u32 {
        match m {
            1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
            4 | 6 | 9 | 11 => 30,
            2 => {
                if is_leap(y) {
                    29
                } else {
                    28
                }
            }
            _ => unreachable!(),
        }
    }
    // 2014-01-02 was a Thursday; weekday 0 is Monday.
    let (mut y, mut m, mut d, mut wd) = (2014i32, 1u32, 2u32, 3u32);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if wd < 5 {
            out.push(format!("{y:04}-{m:02}-{d:02}"));
        }
        wd = (wd + 1) % 7;
        d += 1;
        if d > days_in_month(y, m) {
            d = 1;
            m += 1;
            if m > 12 {
                m = 1;
                y += 1;
            }
        }
    }
    out
}

/// Generates a full price panel from the one-factor model.
pub fn generate(config: &SyntheticConfig) -> Result<PricePanel> {
    if config.stocks < 2 {
        return Err(Error::Invalid(format!(
            "synthetic universe needs at least 2 stocks, got {}",
            config.stocks
        )));
    }
    if config.days < 100 {
        return Err(Error::Invalid(format!(
            "synthetic history needs at least 100 days, got {}",
            config.days
        )));
    }
    let n = config.stocks;
    let days = config.days;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = |rng: &mut ChaCha8Rng| -> f64 { rng.sample(StandardNormal) };

    let betas: Vec<f64> = (0..n)
        .map(|_| (1.0 + 0.25 * normal(&mut rng)).clamp(0.2, 2.2))
        .collect();
    let base_idio: Vec<f64> = (0..n)
        .map(|_| config.idio_vol * (0.35 * normal(&mut rng)).exp())
        .collect();
    let mut price: Vec<f64> = (0..n).map(|_| rng.gen_range(15.0..250.0)).collect();
    let mut shares: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(17.0f64..20.0).exp())
        .collect();

    let phi = config.vol_persistence;
    let mut h_market = 0.0f64;
    let mut h_idio = alloc::vec![0.0f64; n];

    let mut prices = Matrix::zeros(days, n);
    let mut shares_mat = Matrix::zeros(days, n);
    for i in 0..n {
        prices[(0, i)] = price[i];
        shares_mat[(0, i)] = shares[i];
    }

    for t in 1..days {
        if t % SHARES_STEP_DAYS == 0 {
            for s in shares.iter_mut() {
                *s *= (0.02 * normal(&mut rng)).exp();
            }
        }
        // Market-wide volatility moves only gently: a common scale shift
        // leaves every optimal weight vector nearly unchanged, so it would
        // only add estimation noise. The per-stock idiosyncratic states
        // carry the real dynamics (and the leverage feedback), which is
        // what makes stale volatility estimates genuinely stale.
        let eps_m: f64 = normal(&mut rng);
        let sigma_m = config.factor_vol * h_market.exp();
        let factor = sigma_m * eps_m;
        h_market = (phi * h_market + 0.3 * config.vol_of_vol * normal(&mut rng)
            - 0.3 * config.leverage * eps_m)
            .clamp(-0.9, 0.9);

        for i in 0..n {
            let eps: f64 = normal(&mut rng);
            let sigma_i = base_idio[i] * h_idio[i].exp();
            let r = (config.drift + betas[i] * factor + sigma_i * eps).max(-0.5);
            price[i] *= 1.0 + r;
            prices[(t, i)] = price[i];
            shares_mat[(t, i)] = shares[i];
            h_idio[i] = (phi * h_idio[i] + config.vol_of_vol * normal(&mut rng)
                - config.leverage * eps)
                .clamp(-0.9, 0.9);
        }
    }

    let tickers: Vec<String> = (0..n).map(|i| format!("S{i:03}")).collect();
    PricePanel::new(business_days(days), tickers, prices, shares_mat)
}
