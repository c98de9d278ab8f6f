//! Train an LSTM on a noisy sine wave and forecast one step ahead.

use cryptotrend::features::{all_windows, Scaler, ScalerKind};
use cryptotrend::models::{lstm_predict, lstm_train, LstmConfig, LstmModel};

fn main() -> cryptotrend::Result<()> {
    let series: Vec<f64> = (0..400).map(|t| 10.0 + (t as f64 * 0.15).sin() + 0.3 * (t as f64 * 0.041).cos()).collect();
    let scaler = Scaler::fit_column(&series[..300], ScalerKind::MinMax)?;
    let scaled: Vec<f64> = series.iter().map(|v| scaler.transform_value(0, *v)).collect();
    let inputs: Vec<Vec<f64>> = scaled.iter().map(|v| vec![*v]).collect();
    let windows = all_windows(&inputs, &scaled, 12);
    let (train, test) = windows.split_at(300 - 12);

    let cfg = LstmConfig { epochs: 150, ..LstmConfig::default() };
    let (model, curve) = lstm_train(&LstmModel::new(1, &cfg)?, train)?;
    println!("loss {:.5} -> {:.5} over {} epochs", curve[0], curve.last().unwrap(), curve.len());

    let preds = lstm_predict(&model, test, &scaler)?;
    let mae = test.iter().zip(&preds).map(|(w, p)| (series[w.target_index] - p).abs()).sum::<f64>() / preds.len() as f64;
    println!("test MAE {mae:.4} on {} windows", preds.len());
    Ok(())
}
