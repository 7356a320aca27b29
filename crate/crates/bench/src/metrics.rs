//! Per-block metrics and the CSV schema.

use std::io::Write;

use crate::BenchError;

/// Reported in place of −∞ dB.
pub const MSE_FLOOR_DB: f64 = -400.0;
/// Reported in place of +∞ dB.
pub const ERLE_CAP_DB: f64 = 400.0;

pub const CSV_HEADER: [&str; 8] = [
    "algo",
    "trial",
    "block",
    "mse_db",
    "smoothed_mse_db",
    "erle_db",
    "q",
    "us_per_block",
];

pub fn mean_square(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// `10·log₁₀` of a power, floored at [`MSE_FLOOR_DB`].
pub fn power_db(power: f64) -> f64 {
    if power > 0.0 {
        (10.0 * power.log10()).max(MSE_FLOOR_DB)
    } else {
        MSE_FLOOR_DB
    }
}

pub fn mse_db(errors: &[f64]) -> f64 {
    power_db(mean_square(errors))
}

/// `10·log₁₀(E{d²}/E{e²})`, capped at [`ERLE_CAP_DB`].
pub fn erle_db(d: &[f64], e: &[f64]) -> f64 {
    let pe = mean_square(e);
    let pd = mean_square(d);
    if pe <= 0.0 {
        return ERLE_CAP_DB;
    }
    if pd <= 0.0 {
        return -ERLE_CAP_DB;
    }
    (10.0 * (pd / pe).log10()).clamp(-ERLE_CAP_DB, ERLE_CAP_DB)
}

/// Trailing moving average, `window` ≥ 1.
pub fn moving_average(x: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    for (i, v) in x.iter().enumerate() {
        acc += v;
        if i >= window {
            acc -= x[i - window];
        }
        out.push(acc / (i + 1).min(window) as f64);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub algo: String,
    pub trial: usize,
    pub block: usize,
    pub mse_db: f64,
    pub smoothed_mse_db: Option<f64>,
    pub erle_db: Option<f64>,
    pub q: Option<f64>,
    pub us_per_block: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

pub fn write_csv<W: Write>(out: W, records: &[MetricsRecord]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.algo.clone(),
            r.trial.to_string(),
            r.block.to_string(),
            format!("{}", r.mse_db),
            opt(r.smoothed_mse_db),
            opt(r.erle_db),
            opt(r.q),
            r.us_per_block
                .map(|x| format!("{x:.3}"))
                .unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_values() {
        assert!((mse_db(&[0.1; 8]) + 20.0).abs() < 1e-12);
        assert_eq!(mse_db(&[1.0]), 0.0);
        assert!((mse_db(&[0.0, 2.0]) - 3.010_299_956_6).abs() < 1e-9);
        assert_eq!(mse_db(&[0.0; 4]), MSE_FLOOR_DB);
    }

    #[test]
    fn erle_values() {
        let d = [0.3, -0.7, 0.2];
        assert_eq!(erle_db(&d, &d), 0.0);
        let e: Vec<f64> = d.iter().map(|v| v / 10.0).collect();
        assert!((erle_db(&d, &e) - 20.0).abs() < 1e-12);
        assert!((erle_db(&[1.0, 1.0], &[1.0, 0.0]) - 3.010_299_956_6).abs() < 1e-9);
        assert_eq!(erle_db(&d, &[0.0; 3]), ERLE_CAP_DB);
    }

    #[test]
    fn smoothing() {
        assert_eq!(moving_average(&[1.0, 3.0, 5.0], 1), vec![1.0, 3.0, 5.0]);
        assert_eq!(moving_average(&[1.0, 3.0, 5.0], 2), vec![1.0, 2.0, 4.0]);
    }

    #[test]
    fn csv_schema() {
        let rec = MetricsRecord {
            algo: "fdefln".into(),
            trial: 0,
            block: 3,
            mse_db: -20.0,
            smoothed_mse_db: Some(-19.5),
            erle_db: None,
            q: Some(-0.25),
            us_per_block: None,
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, &[rec]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "algo,trial,block,mse_db,smoothed_mse_db,erle_db,q,us_per_block\nfdefln,0,3,-20,-19.5,,-0.25,\n"
        );
    }
}
