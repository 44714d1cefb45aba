//! Price/return ingestion, sample splits and descriptive statistics.

use crate::error::{Error, Result};
use crate::numeric::empirical_quantile;
use chrono::NaiveDate;
use serde::Serialize;
use std::path::Path;

/// Daily index levels.
#[derive(Debug, Clone)]
pub struct PriceSeries {
    dates: Vec<NaiveDate>,
    prices: Vec<f64>,
}

impl PriceSeries {
    pub fn new(dates: Vec<NaiveDate>, prices: Vec<f64>) -> Result<Self> {
        if dates.len() != prices.len() {
            return Err(Error::InvalidInput(format!(
                "dates ({}) and prices ({}) length mismatch",
                dates.len(),
                prices.len()
            )));
        }
        if prices.len() < 2 {
            return Err(Error::InvalidInput(
                "price series needs at least 2 observations".into(),
            ));
        }
        for (i, w) in dates.windows(2).enumerate() {
            if w[0] >= w[1] {
                return Err(Error::InvalidInput(format!(
                    "dates must be strictly increasing (violated at index {})",
                    i + 1
                )));
            }
        }
        for (i, p) in prices.iter().enumerate() {
            if !p.is_finite() || *p <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "non-positive price {p} at index {i}"
                )));
            }
        }
        Ok(PriceSeries { dates, prices })
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }
}

/// Dated percentage log-returns; the universal model input.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl ReturnSeries {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "dates ({}) and returns ({}) length mismatch",
                dates.len(),
                values.len()
            )));
        }
        if values.is_empty() {
            return Err(Error::InvalidInput("empty return series".into()));
        }
        for (i, w) in dates.windows(2).enumerate() {
            if w[0] >= w[1] {
                return Err(Error::InvalidInput(format!(
                    "dates must be strictly increasing (violated at index {})",
                    i + 1
                )));
            }
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite return at index {i}"
                )));
            }
        }
        Ok(ReturnSeries { dates, values })
    }

    /// Build a series with synthetic consecutive dates; handy for simulated data.
    pub fn from_values(values: Vec<f64>) -> Self {
        let start = NaiveDate::from_ymd_opt(2000, 1, 3).unwrap();
        let dates = (0..values.len() as i64)
            .map(|i| start + chrono::Duration::days(i))
            .collect();
        ReturnSeries { dates, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    /// Contiguous sub-series over [start, end).
    pub fn window(&self, start: usize, end: usize) -> ReturnSeries {
        ReturnSeries {
            dates: self.dates[start..end].to_vec(),
            values: self.values[start..end].to_vec(),
        }
    }
}

/// Descriptive statistics of a return sample.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryStats {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std_dev: f64,
    pub skewness: f64,
    /// raw fourth standardized moment; 3 for a Gaussian
    pub kurtosis: f64,
    pub quantile_level: f64,
    pub quantile: f64,
    /// Jarque-Bera statistic n (S²/6 + (K-3)²/24)
    pub jb: f64,
}

/// Percent log-returns: y_t = (ln p_{t+1} - ln p_t) · 100, dated at t+1.
pub fn compute_log_returns(prices: &PriceSeries) -> ReturnSeries {
    let values: Vec<f64> = prices
        .prices()
        .windows(2)
        .map(|w| (w[1].ln() - w[0].ln()) * 100.0)
        .collect();
    ReturnSeries {
        dates: prices.dates()[1..].to_vec(),
        values,
    }
}

/// Descriptive statistics with an n-denominator moment convention
/// (std_dev uses n-1) and a linear-interpolation empirical quantile.
pub fn summary_statistics(returns: &ReturnSeries, quantile_level: f64) -> Result<SummaryStats> {
    if !(0.0 < quantile_level && quantile_level < 1.0) {
        return Err(Error::InvalidInput(format!(
            "quantile level {quantile_level} outside (0,1)"
        )));
    }
    let y = returns.values();
    let n = y.len();
    if n < 2 {
        return Err(Error::InvalidInput(
            "summary statistics need at least 2 observations".into(),
        ));
    }
    let nf = n as f64;
    let mean = y.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    let mut ss = 0.0;
    for v in y {
        let d = v - mean;
        let d2 = d * d;
        ss += d2;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if m2 == 0.0 {
        return Err(Error::Numerical(
            "constant series: skewness and kurtosis are undefined".into(),
        ));
    }
    let std_dev = (ss / (nf - 1.0)).sqrt();
    let skewness = m3 / m2.powf(1.5);
    let kurtosis = m4 / (m2 * m2);
    let jb = nf * (skewness * skewness / 6.0 + (kurtosis - 3.0).powi(2) / 24.0);
    let min = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(SummaryStats {
        n,
        min,
        max,
        mean,
        std_dev,
        skewness,
        kurtosis,
        quantile_level,
        quantile: empirical_quantile(y, quantile_level),
        jb,
    })
}

/// Split off the last `out_of_sample_n` observations as the validation set.
pub fn split_sample(
    returns: &ReturnSeries,
    out_of_sample_n: usize,
) -> Result<(ReturnSeries, ReturnSeries)> {
    let n = returns.len();
    if out_of_sample_n == 0 || out_of_sample_n >= n {
        return Err(Error::InvalidInput(format!(
            "out-of-sample size {out_of_sample_n} must lie strictly between 0 and {n}"
        )));
    }
    let split = n - out_of_sample_n;
    Ok((returns.window(0, split), returns.window(split, n)))
}

/// What a CSV file turned out to contain.
#[derive(Debug)]
pub enum LoadedSeries {
    Prices(PriceSeries),
    Returns(ReturnSeries),
}

/// Read a CSV with a header row and columns `date` + (`price` | `return`).
///
/// Malformed rows are rejected with their 1-based data row number.
pub fn read_series_csv(path: &Path) -> Result<LoadedSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
            ),
            _ => Error::InvalidInput(e.to_string()),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::InvalidInput(format!("cannot read CSV header: {e}")))?
        .clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
    };
    let date_col = find("date").ok_or_else(|| {
        Error::InvalidInput(format!("{}: missing `date` column", path.display()))
    })?;
    let price_col = find("price");
    let return_col = find("return");
    let (value_col, is_price) = match (price_col, return_col) {
        (Some(c), None) => (c, true),
        (None, Some(c)) => (c, false),
        (Some(_), Some(_)) => {
            return Err(Error::InvalidInput(format!(
                "{}: both `price` and `return` columns present; keep one",
                path.display()
            )))
        }
        (None, None) => {
            return Err(Error::InvalidInput(format!(
                "{}: need a `price` or `return` column",
                path.display()
            )))
        }
    };

    let mut dates = Vec::new();
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::CsvRow {
            row,
            message: e.to_string(),
        })?;
        let date_str = record.get(date_col).ok_or_else(|| Error::CsvRow {
            row,
            message: "missing date field".into(),
        })?;
        let date = NaiveDate::parse_from_str(date_str, "%Y-%m-%d").map_err(|e| Error::CsvRow {
            row,
            message: format!("bad date `{date_str}`: {e}"),
        })?;
        let val_str = record.get(value_col).ok_or_else(|| Error::CsvRow {
            row,
            message: "missing value field".into(),
        })?;
        let value: f64 = val_str.parse().map_err(|e| Error::CsvRow {
            row,
            message: format!("bad number `{val_str}`: {e}"),
        })?;
        dates.push(date);
        values.push(value);
    }

    if is_price {
        Ok(LoadedSeries::Prices(PriceSeries::new(dates, values)?))
    } else {
        Ok(LoadedSeries::Returns(ReturnSeries::new(dates, values)?))
    }
}

/// Load returns from a CSV, computing log-returns when given prices.
pub fn load_returns(path: &Path) -> Result<ReturnSeries> {
    match read_series_csv(path)? {
        LoadedSeries::Prices(p) => Ok(compute_log_returns(&p)),
        LoadedSeries::Returns(r) => Ok(r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn prices(levels: &[f64]) -> PriceSeries {
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let dates = (0..levels.len() as i64)
            .map(|i| start + chrono::Duration::days(i))
            .collect();
        PriceSeries::new(dates, levels.to_vec()).unwrap()
    }

    #[test]
    fn log_returns_identity_case() {
        let y = compute_log_returns(&prices(&[100.0, 100.0]));
        assert_eq!(y.values(), &[0.0]);
    }

    #[test]
    fn log_returns_hand_values() {
        let y = compute_log_returns(&prices(&[100.0, 100.0 * (0.01_f64).exp()]));
        assert_relative_eq!(y.values()[0], 1.0, epsilon = 1e-12);
        let y = compute_log_returns(&prices(&[100.0, 90.0]));
        assert_relative_eq!(y.values()[0], -10.536051565782628, epsilon = 1e-9);
    }

    #[test]
    fn constant_prices_give_zero_returns() {
        let y = compute_log_returns(&prices(&[42.0; 17]));
        assert!(y.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn nonpositive_price_rejected_with_index() {
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let dates: Vec<NaiveDate> = (0..3).map(|i| start + chrono::Duration::days(i)).collect();
        let err = PriceSeries::new(dates, vec![100.0, -5.0, 100.0]).unwrap_err();
        assert!(err.to_string().contains("index 1"), "{err}");
    }

    #[test]
    fn summary_small_sample() {
        let y = ReturnSeries::from_values(vec![-1.0, 0.0, 1.0]);
        let s = summary_statistics(&y, 0.05).unwrap();
        assert_relative_eq!(s.mean, 0.0);
        assert_relative_eq!(s.min, -1.0);
        assert_relative_eq!(s.max, 1.0);
    }

    #[test]
    fn summary_symmetric_sample_zero_skew() {
        // dyadic values keep every accumulation exact
        let y = ReturnSeries::from_values(vec![-4.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 4.0]);
        let s = summary_statistics(&y, 0.05).unwrap();
        assert_eq!(s.skewness, 0.0);
    }

    #[test]
    fn summary_constant_series_flagged() {
        let y = ReturnSeries::from_values(vec![3.0; 20]);
        assert!(summary_statistics(&y, 0.05).is_err());
    }

    #[test]
    fn jb_matches_hand_formula() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let vals: Vec<f64> = (0..500)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * 1.3 + 0.1 + z * z * 0.2
            })
            .collect();
        let y = ReturnSeries::from_values(vals.clone());
        let s = summary_statistics(&y, 0.05).unwrap();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let m2 = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let m3 = vals.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
        let m4 = vals.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
        let sk = m3 / m2.powf(1.5);
        let ku = m4 / (m2 * m2);
        let jb = n * (sk * sk / 6.0 + (ku - 3.0).powi(2) / 24.0);
        assert_relative_eq!(s.jb, jb, epsilon = 1e-12);
    }

    #[test]
    fn jb_accepts_gaussian_data() {
        // The test has asymptotic size 5% at the chi-square(2) critical value
        // 5.99, so about 5 of 100 Gaussian samples get rejected. Simulation
        // confirms the 5% rate; 10/100 is a comfortable binomial bound.
        let mut rejections = 0;
        for seed in 0..100u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let vals: Vec<f64> = (0..100_000)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let s = summary_statistics(&ReturnSeries::from_values(vals), 0.05).unwrap();
            if s.jb > 5.99 {
                rejections += 1;
            }
        }
        assert!(rejections <= 10, "JB rejected {rejections}/100 Gaussian samples");
    }

    #[test]
    fn split_boundaries() {
        let y = ReturnSeries::from_values((0..10).map(|i| i as f64).collect());
        assert!(split_sample(&y, 10).is_err());
        assert!(split_sample(&y, 0).is_err());
        let (a, b) = split_sample(&y, 3).unwrap();
        assert_eq!(a.len(), 7);
        assert_eq!(b.len(), 3);
        assert_eq!(b.values(), &[7.0, 8.0, 9.0]);
    }

    #[test]
    fn split_three_one() {
        let y = ReturnSeries::from_values(vec![1.0, 2.0, 3.0]);
        let (a, b) = split_sample(&y, 1).unwrap();
        assert_eq!(a.values(), &[1.0, 2.0]);
        assert_eq!(b.values(), &[3.0]);
    }

    #[test]
    fn split_sizes_large_sample() {
        let y = ReturnSeries::from_values(vec![0.1; 5874]);
        let (ins, oos) = split_sample(&y, 2000).unwrap();
        assert_eq!(ins.len(), 3874);
        assert_eq!(oos.len(), 2000);
    }

    #[test]
    fn split_concat_roundtrip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let vals: Vec<f64> = (0..97).map(|_| StandardNormal.sample(&mut rng)).collect();
        let y = ReturnSeries::from_values(vals);
        let (a, b) = split_sample(&y, 31).unwrap();
        let mut rejoined = a.values().to_vec();
        rejoined.extend_from_slice(b.values());
        assert_eq!(rejoined, y.values());
        let mut dates = a.dates().to_vec();
        dates.extend_from_slice(b.dates());
        assert_eq!(dates, y.dates());
    }

    #[test]
    fn csv_roundtrip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let ok = dir.path().join("prices.csv");
        std::fs::write(&ok, "date,price\n2020-01-01,100\n2020-01-02,101.5\n").unwrap();
        match read_series_csv(&ok).unwrap() {
            LoadedSeries::Prices(p) => assert_eq!(p.len(), 2),
            _ => panic!("expected prices"),
        }

        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "date,return\n2020-01-01,0.5\n2020-01-02,oops\n").unwrap();
        let err = read_series_csv(&bad).unwrap_err();
        match err {
            Error::CsvRow { row, .. } => assert_eq!(row, 2),
            other => panic!("unexpected error {other}"),
        }
    }
}
