//! Training loop, evaluation and prediction.

use serde::Serialize;

use crate::data::{accuracy, BatchIter, Label, Metrics, SampleSource};
use crate::error::{Error, Result};
use crate::model::DualStreamModel;
use crate::ops::{softmax, softmax_cross_entropy, Mode};
use crate::optim::{sgd_step, SgdConfig};
use crate::tensor::Tensor4;

/// One row of the training log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub val_acc: Option<f64>,
}

impl EpochLog {
    pub const CSV_HEADER: &'static str = "epoch,lr,train_loss,val_acc";

    pub fn csv_row(&self) -> String {
        let val = self.val_acc.map(|a| format!("{a:.6}")).unwrap_or_default();
        format!("{},{:e},{:.8},{}", self.epoch, self.lr, self.train_loss, val)
    }
}

fn at_batch(e: Error, epoch: usize, batch: usize) -> Error {
    match e {
        Error::NonFinite(msg) => Error::NonFinite(format!("epoch {epoch}, batch {batch}: {msg}")),
        other => other,
    }
}

/// One pass over `source` in the `(seed, epoch)` order. Returns the
/// sample-weighted mean loss.
pub fn train_epoch(
    model: &mut DualStreamModel<f32>,
    source: &dyn SampleSource,
    sgd: &SgdConfig,
    seed: u64,
    epoch: usize,
) -> Result<f64> {
    let mut total = 0.0;
    for (b, batch) in BatchIter::shuffled(source, sgd.batch_size, seed, epoch).enumerate() {
        let batch = batch?;
        let step = |model: &mut DualStreamModel<f32>| -> Result<f32> {
            let logits = model.forward(&batch.x, Mode::Train)?;
            let (loss, grad) = softmax_cross_entropy(&logits, &batch.labels)?;
            if !loss.is_finite() {
                return Err(Error::NonFinite(format!("loss is {loss}")));
            }
            model.backward(&grad)?;
            Ok(loss)
        };
        let loss = step(model).map_err(|e| at_batch(e, epoch, b))?;
        sgd_step(&mut model.params, epoch, sgd);
        total += f64::from(loss) * batch.labels.len() as f64;
    }
    Ok(total / source.len() as f64)
}

/// Runs `sgd.epochs` epochs, calling `on_epoch` after each one.
pub fn train(
    model: &mut DualStreamModel<f32>,
    train_set: &dyn SampleSource,
    val_set: Option<&dyn SampleSource>,
    sgd: &SgdConfig,
    seed: u64,
    mut on_epoch: impl FnMut(&EpochLog, &DualStreamModel<f32>) -> Result<()>,
) -> Result<Vec<EpochLog>> {
    sgd.validate()?;
    check_crop(model, train_set)?;
    let mut logs = Vec::with_capacity(sgd.epochs);
    for epoch in 0..sgd.epochs {
        let train_loss = train_epoch(model, train_set, sgd, seed, epoch)?;
        let val_acc = match val_set {
            Some(v) => Some(evaluate(model, v, sgd.batch_size)?.0.acc),
            None => None,
        };
        let log = EpochLog { epoch, lr: sgd.lr_at(epoch), train_loss, val_acc };
        log::info!("{}", log.csv_row());
        on_epoch(&log, model)?;
        logs.push(log);
    }
    Ok(logs)
}

fn check_crop(model: &DualStreamModel<f32>, source: &dyn SampleSource) -> Result<()> {
    if model.config().crop != source.crop() {
        return Err(Error::Config(format!(
            "model crop {} does not match data crop {}",
            model.config().crop,
            source.crop()
        )));
    }
    Ok(())
}

/// Index of the larger logit, per row.
pub fn argmax_labels(logits: &Tensor4<f32>) -> Vec<Label> {
    logits
        .data()
        .chunks(2)
        .map(|row| if row[1] > row[0] { Label::Pg } else { Label::Cg })
        .collect()
}

/// Eval-mode predictions for every sample, in source order.
pub fn predict_all(model: &DualStreamModel<f32>, source: &dyn SampleSource, batch_size: usize) -> Result<Vec<Label>> {
    check_crop(model, source)?;
    let mut out = Vec::with_capacity(source.len());
    for batch in BatchIter::sequential(source, batch_size) {
        out.extend(argmax_labels(&model.infer(&batch?.x)?));
    }
    Ok(out)
}

pub fn evaluate(model: &DualStreamModel<f32>, source: &dyn SampleSource, batch_size: usize) -> Result<(Metrics, Vec<Label>)> {
    let predictions = predict_all(model, source, batch_size)?;
    let metrics = accuracy(&predictions, &source.labels())?;
    Ok((metrics, predictions))
}

/// Label and `[p_cg, p_pg]` for one `(1, 3, crop, crop)` image.
pub fn predict_one(model: &DualStreamModel<f32>, x: &Tensor4<f32>) -> Result<(Label, [f64; 2])> {
    let logits = model.infer(x)?;
    let p = softmax(&logits);
    let probs = [f64::from(p.data()[0]), f64::from(p.data()[1])];
    Ok((argmax_labels(&logits)[0], probs))
}
