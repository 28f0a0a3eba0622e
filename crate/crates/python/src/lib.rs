//! Python bindings: audio decoding, feature extraction, checkpoint scoring
//! and ROC-AUC.

use birdcall::audio::{decode_wav as decode, prepare_clip};
use birdcall::cache::read_feature_cache;
use birdcall::eval::roc_auc as auc;
use birdcall::features::extract_features as extract;
use birdcall::nn::{build_model, load_checkpoint};
use birdcall::{AudioClip, CbrnnConfig, CbrnnModel, FeatureConfig, FeaturePair, Tensor};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: birdcall::Error) -> PyErr {
    match e {
        birdcall::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// `(T, F, C)` tensor as nested lists; single-channel tensors drop the last axis.
fn nested(t: &Tensor) -> Vec<Vec<Vec<f64>>> {
    let [frames, freq, channels] = t.shape();
    (0..frames)
        .map(|i| (0..freq).map(|f| (0..channels).map(|c| t.get(i, f, c)).collect()).collect())
        .collect()
}

type Features = (Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>);

fn to_python(pair: &FeaturePair) -> Features {
    let mbe = nested(&pair.mbe).into_iter().map(|row| row.into_iter().map(|c| c[0]).collect()).collect();
    (mbe, nested(&pair.domfreq))
}

/// Decodes a PCM WAV file to mono samples in [-1, 1]; returns `(samples, sample_rate)`.
#[pyfunction]
fn decode_wav(path: &str) -> PyResult<(Vec<f64>, u32)> {
    let clip = decode(path).map_err(py_err)?;
    Ok((clip.samples, clip.sample_rate))
}

/// Log mel-band energies (T x 40) and dominant frequencies (T x K x 2) of a
/// clip, padded or truncated to 10 s first.
#[pyfunction]
#[pyo3(signature = (samples, sample_rate = birdcall::SAMPLE_RATE, band_limited = false))]
fn extract_features(samples: Vec<f64>, sample_rate: u32, band_limited: bool) -> PyResult<Features> {
    let cfg = if band_limited { FeatureConfig::band_limited() } else { FeatureConfig::default() };
    let clip = AudioClip::new("clip", samples, sample_rate).map_err(py_err)?;
    let pair = extract(&prepare_clip(clip).map_err(py_err)?, &cfg).map_err(py_err)?;
    Ok(to_python(&pair))
}

/// Reads a `.feat` file written by `birdcall extract`.
#[pyfunction]
fn load_features(path: &str) -> PyResult<Features> {
    Ok(to_python(&read_feature_cache(path).map_err(py_err)?))
}

/// ROC-AUC of `scores` against boolean `labels` (ties count one half).
#[pyfunction]
fn roc_auc(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<f64> {
    Ok(auc(&scores, &labels).map_err(py_err)?.auc)
}

/// Trainable parameters of the default network.
#[pyfunction]
fn default_parameter_count() -> PyResult<usize> {
    Ok(build_model(CbrnnConfig::default(), 0).map_err(py_err)?.parameter_count())
}

/// A trained network loaded from a checkpoint.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: CbrnnModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let inner = load_checkpoint(path.as_ref()).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn parameter_count(&self) -> usize {
        self.inner.parameter_count()
    }

    #[getter]
    fn domfreq_slots(&self) -> usize {
        self.inner.config().domfreq_slots
    }

    /// P(bird present) for each cached feature file.
    fn predict_files(&self, py: Python<'_>, paths: Vec<String>) -> PyResult<Vec<f64>> {
        let slots = self.inner.config().domfreq_slots;
        py.detach(|| {
            let pairs = paths
                .iter()
                .map(|p| birdcall::augment::widen_domfreq(&read_feature_cache(p)?, slots))
                .collect::<birdcall::Result<Vec<_>>>()?;
            self.inner.predict(&pairs)
        })
        .map_err(py_err)
    }
}

#[pymodule]
#[pyo3(name = "birdcall")]
pub fn birdcall_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SAMPLE_RATE", birdcall::SAMPLE_RATE)?;
    m.add_function(wrap_pyfunction!(decode_wav, m)?)?;
    m.add_function(wrap_pyfunction!(extract_features, m)?)?;
    m.add_function(wrap_pyfunction!(load_features, m)?)?;
    m.add_function(wrap_pyfunction!(roc_auc, m)?)?;
    m.add_function(wrap_pyfunction!(default_parameter_count, m)?)?;
    m.add_class::<PyModel>()?;
    Ok(())
}
