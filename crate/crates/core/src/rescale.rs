//! The time transformation t ↦ Λ(t) = ∫ λ(u | H_u) du.

use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::intensity::IntensityModel;
use crate::trains::{SpikeTrain, TransformedTrain};

/// Map event times through the integrated intensity of `model`, with the
/// first event as origin (Λ₁ = 0). The total covers the censored tail up to
/// the train's horizon.
pub fn time_transform(train: &SpikeTrain, model: &IntensityModel, tol: f64) -> Result<TransformedTrain> {
    time_transform_with(train, model, tol, Execution::default())
}

/// [`time_transform`] with explicit control over segment parallelism.
pub fn time_transform_with(
    train: &SpikeTrain,
    model: &IntensityModel,
    tol: f64,
    exec: Execution,
) -> Result<TransformedTrain> {
    model.validate()?;
    let times = train.times();
    if times.is_empty() {
        return Err(Error::TooFew { what: "events", required: 1, got: 0 });
    }
    let increments: Vec<Result<f64>> =
        map_range(times.len() - 1, exec, |j| model.integrated_intensity(times[j], times[j + 1], times[j], tol));

    let mut lambdas = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    lambdas.push(acc);
    for (j, inc) in increments.into_iter().enumerate() {
        let inc = inc?;
        let next = acc + inc;
        if !(next > acc) {
            return Err(Error::Degenerate(format!(
                "transformed interval {} ({inc:e}) is below floating-point resolution",
                j + 1
            )));
        }
        acc = next;
        lambdas.push(acc);
    }
    let last = times[times.len() - 1];
    let tail = if train.horizon() > last {
        model.integrated_intensity(last, train.horizon(), last, tol)?
    } else {
        0.0
    };
    TransformedTrain::new(lambdas, acc + tail)
}
