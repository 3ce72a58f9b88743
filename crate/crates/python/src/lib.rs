//! Python bindings. Invalid arguments raise `ValueError`, numerical failures
//! raise `RuntimeError`.

use std::collections::BTreeMap;

use bellrange::census::{self, ExperimentConfig, PairCensus};
use bellrange::disorder::{self, DisorderSpec, RainbowSpec};
use bellrange::fermion::{self, CorrelationMatrix};
use bellrange::fit::{self, FitOptions, Weighting};
use bellrange::pairstate::{self, FragmentSampler, Interval, PairConfiguration, PowerLawModel};
use bellrange::rng;
use bellrange::Error;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_) | Error::SiteOutOfRange { .. } | Error::Overlap(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for bellrange::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

#[pyclass(name = "CouplingChain", module = "bellrange", frozen)]
struct PyChain(fermion::CouplingChain);

#[pymethods]
impl PyChain {
    #[new]
    fn new(couplings: Vec<f64>) -> PyResult<Self> {
        fermion::CouplingChain::new(couplings).py().map(Self)
    }

    #[getter]
    fn couplings(&self) -> Vec<f64> {
        self.0.couplings().to_vec()
    }

    #[getter]
    fn num_sites(&self) -> usize {
        self.0.num_sites()
    }

    /// Half-filled ground state.
    fn ground_state(&self) -> PyResult<PyCorrelations> {
        fermion::half_filled_ground_state(&self.0).py().map(PyCorrelations)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        fermion::CouplingChain::from_json(s).py().map(Self)
    }

    fn __len__(&self) -> usize {
        self.0.num_sites()
    }

    fn __repr__(&self) -> String {
        format!("CouplingChain(num_sites={})", self.0.num_sites())
    }
}

/// Correlation matrix `<c_j^dag c_k>` with 0-based sites.
#[pyclass(name = "CorrelationMatrix", module = "bellrange", frozen)]
struct PyCorrelations(CorrelationMatrix);

#[pymethods]
impl PyCorrelations {
    #[getter]
    fn num_sites(&self) -> usize {
        self.0.num_sites()
    }

    fn get(&self, j: usize, k: usize) -> PyResult<f64> {
        let n = self.0.num_sites();
        if j >= n || k >= n {
            return Err(py_err(Error::SiteOutOfRange { site: j.max(k), num_sites: n }));
        }
        Ok(self.0.get(j, k))
    }

    fn to_list(&self) -> Vec<Vec<f64>> {
        let n = self.0.num_sites();
        (0..n).map(|j| (0..n).map(|k| self.0.get(j, k)).collect()).collect()
    }

    fn entropy(&self, sites: Vec<usize>) -> PyResult<f64> {
        fermion::subsystem_entropy(&self.0, &sites).py()
    }

    fn coherent_info(&self, a: Vec<usize>, b: Vec<usize>) -> PyResult<f64> {
        fermion::coherent_info(&self.0, &a, &b).py()
    }

    fn coherent_info_sym(&self, a: Vec<usize>, b: Vec<usize>) -> PyResult<f64> {
        fermion::coherent_info_sym(&self.0, &a, &b).py()
    }

    fn pair_coherent_info(&self, j: usize, k: usize) -> PyResult<f64> {
        fermion::pair_coherent_info(&self.0, j, k).py()
    }

    fn projector_defect(&self) -> f64 {
        self.0.projector_defect()
    }

    fn trace(&self) -> f64 {
        self.0.trace()
    }
}

/// Random-singlet chain with couplings `u^delta`.
#[pyfunction]
fn rsp_chain(num_sites: usize, delta: f64, seed: u64) -> PyResult<PyChain> {
    let spec = DisorderSpec::new(delta).py()?;
    disorder::rsp_chain(num_sites, &spec, &mut rng::stream(seed)).py().map(PyChain)
}

#[pyfunction]
fn rainbow_chain(half_length: usize, decay: f64) -> PyResult<PyChain> {
    let spec = RainbowSpec::new(half_length, decay).py()?;
    Ok(PyChain(disorder::rainbow_chain(&spec)))
}

/// Symmetric coherent information of each mirror pair `(i, 2N+1-i)`,
/// `i = 1..N`.
#[pyfunction]
fn rainbow_profile(half_length: usize, decay: f64) -> PyResult<Vec<f64>> {
    let spec = RainbowSpec::new(half_length, decay).py()?;
    census::rainbow_profile(&spec).py()
}

/// Product of singlet-like pairs with 1-based sites.
#[pyclass(name = "PairState", module = "bellrange", frozen)]
struct PyPairState(PairConfiguration);

#[pymethods]
impl PyPairState {
    #[new]
    #[pyo3(signature = (num_sites, pairs, qudit_dim = 2))]
    fn new(num_sites: usize, pairs: Vec<(usize, usize)>, qudit_dim: u32) -> PyResult<Self> {
        PairConfiguration::new(num_sites, qudit_dim, pairs).py().map(Self)
    }

    #[getter]
    fn num_sites(&self) -> usize {
        self.0.num_sites()
    }

    #[getter]
    fn qudit_dim(&self) -> u32 {
        self.0.qudit_dim()
    }

    #[getter]
    fn pairs(&self) -> Vec<(usize, usize)> {
        self.0.pairs().to_vec()
    }

    fn partner(&self, site: usize) -> Option<usize> {
        self.0.partner(site)
    }

    fn is_perfect_matching(&self) -> bool {
        self.0.is_perfect_matching()
    }

    fn length_histogram(&self) -> Vec<u64> {
        self.0.length_histogram()
    }

    /// Entropy of the interval `start ..= start + length - 1`.
    fn entropy_of_interval(&self, start: usize, length: usize) -> PyResult<f64> {
        entropy_of_interval(self, start, length)
    }

    fn mean_interval_entropy(&self, length: usize) -> PyResult<f64> {
        pairstate::mean_interval_entropy(&self.0, length).py()
    }

    fn mean_distillable(&self, n_a: usize, n_b: usize, r: usize) -> PyResult<f64> {
        pairstate::mean_distillable(&self.0, n_a, n_b, r).py()
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn __repr__(&self) -> String {
        format!(
            "PairState(num_sites={}, pairs={}, qudit_dim={})",
            self.0.num_sites(),
            self.0.pairs().len(),
            self.0.qudit_dim()
        )
    }
}

fn model(alpha: f64, amplitude: f64) -> PyResult<PowerLawModel> {
    PowerLawModel::one_dimensional(alpha, amplitude).py()
}

/// Concatenated rainbow fragments with half-lengths drawn from `k^-alpha`.
#[pyfunction]
#[pyo3(signature = (alpha, num_fragments, seed, qudit_dim = 2, k_max = pairstate::DEFAULT_K_MAX))]
fn sample_chain_state(
    alpha: f64,
    num_fragments: usize,
    seed: u64,
    qudit_dim: u32,
    k_max: usize,
) -> PyResult<PyPairState> {
    let sampler = FragmentSampler::new(model(alpha, 1.0)?, k_max).py()?;
    pairstate::sample_chain_state(&sampler, num_fragments, qudit_dim, &mut rng::stream(seed))
        .py()
        .map(PyPairState)
}

#[pyfunction]
#[pyo3(signature = (half_lengths, qudit_dim = 2))]
fn build_chain_state(half_lengths: Vec<usize>, qudit_dim: u32) -> PyResult<PyPairState> {
    let seq = pairstate::FragmentSequence::new(half_lengths).py()?;
    pairstate::build_chain_state(&seq, qudit_dim).py().map(PyPairState)
}

#[pyfunction]
fn entropy_of_interval(state: &PyPairState, start: usize, length: usize) -> PyResult<f64> {
    let a = Interval::new(start, length).py()?;
    pairstate::entropy_of_interval(&state.0, &a).py()
}

/// Distillable entanglement between two disjoint intervals, each given as
/// `(start, length)`.
#[pyfunction]
fn distillable_between(
    state: &PyPairState,
    a: (usize, usize),
    b: (usize, usize),
) -> PyResult<f64> {
    let a = Interval::new(a.0, a.1).py()?;
    let b = Interval::new(b.0, b.1).py()?;
    pairstate::distillable_between(&state.0, &a, &b).py()
}

#[pyfunction]
#[pyo3(signature = (alpha, n_a, qudit_dim = 2.0, amplitude = 1.0))]
fn analytic_entropy(alpha: f64, n_a: f64, qudit_dim: f64, amplitude: f64) -> PyResult<f64> {
    pairstate::analytic_entropy(&model(alpha, amplitude)?, qudit_dim, n_a).py()
}

#[pyfunction]
#[pyo3(signature = (alpha, n_a, n_b, r, qudit_dim = 2.0, amplitude = 1.0))]
fn analytic_ed(
    alpha: f64,
    n_a: f64,
    n_b: f64,
    r: f64,
    qudit_dim: f64,
    amplitude: f64,
) -> PyResult<f64> {
    pairstate::analytic_ed(&model(alpha, amplitude)?, qudit_dim, n_a, n_b, r).py()
}

/// Histogram of qualifying pair lengths over an ensemble of random chains.
#[pyclass(name = "PairCensus", module = "bellrange", frozen)]
struct PyCensus(PairCensus);

#[pymethods]
impl PyCensus {
    #[getter]
    fn counts(&self) -> BTreeMap<usize, u64> {
        self.0.counts().clone()
    }

    #[getter]
    fn num_samples(&self) -> usize {
        self.0.num_samples
    }

    #[getter]
    fn chain_length(&self) -> usize {
        self.0.chain_length
    }

    #[getter]
    fn pairs_examined(&self) -> u64 {
        self.0.pairs_examined
    }

    #[getter]
    fn degenerate_discards(&self) -> u64 {
        self.0.degenerate_discards
    }

    fn total(&self) -> u64 {
        self.0.total()
    }

    fn qualifying_fraction(&self) -> PyResult<f64> {
        census::qualifying_fraction(&self.0).py()
    }

    fn pairs_per_site(&self) -> PyResult<f64> {
        census::pairs_per_site(&self.0).py()
    }

    /// Power-law fit of the histogram; returns a dict with `exponent`,
    /// `stderr`, `r_squared`, `bins_used`, `log_amplitude` and `window`.
    #[pyo3(signature = (r_min = 3, r_max = 101, resamples = 200, seed = 0, weighted = false))]
    fn fit(
        &self,
        py: Python<'_>,
        r_min: usize,
        r_max: usize,
        resamples: usize,
        seed: u64,
        weighted: bool,
    ) -> PyResult<Py<PyAny>> {
        let opts = FitOptions {
            window: (r_min, r_max),
            weighting: if weighted { Weighting::Counts } else { Weighting::Unweighted },
            resamples,
            bootstrap_seed: seed,
        };
        let f = fit::power_law_fit_with(&self.0, &opts).py()?;
        let d = pyo3::types::PyDict::new(py);
        d.set_item("exponent", f.exponent)?;
        d.set_item("stderr", f.exponent_stderr)?;
        d.set_item("r_squared", f.r_squared)?;
        d.set_item("bins_used", f.bins_used)?;
        d.set_item("log_amplitude", f.log_amplitude)?;
        d.set_item("window", (f.window[0], f.window[1]))?;
        Ok(d.into_any().unbind())
    }
}

#[pyfunction]
#[pyo3(signature = (chain_length, num_samples, seed, delta = 3.0, threshold_nats = census::DEFAULT_THRESHOLD_NATS, threads = 1))]
fn run_census(
    py: Python<'_>,
    chain_length: usize,
    num_samples: usize,
    seed: u64,
    delta: f64,
    threshold_nats: f64,
    threads: usize,
) -> PyResult<PyCensus> {
    let mut config = ExperimentConfig::new(chain_length, num_samples, delta, seed);
    config.threshold_nats = threshold_nats;
    config.worker_count = threads;
    py.detach(|| census::run_census(&config)).py().map(PyCensus)
}

/// Power-law fit of a plain `{r: count}` histogram.
#[pyfunction]
#[pyo3(signature = (counts, r_min = 3, r_max = 101))]
fn power_law_fit(counts: BTreeMap<usize, u64>, r_min: usize, r_max: usize) -> PyResult<(f64, f64)> {
    let f = fit::power_law_fit(&PairCensus::from_counts(counts), (r_min, r_max)).py()?;
    Ok((f.exponent, f.exponent_stderr))
}

#[pymodule]
#[pyo3(name = "bellrange")]
fn bellrange_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChain>()?;
    m.add_class::<PyCorrelations>()?;
    m.add_class::<PyPairState>()?;
    m.add_class::<PyCensus>()?;
    m.add_function(wrap_pyfunction!(rsp_chain, m)?)?;
    m.add_function(wrap_pyfunction!(rainbow_chain, m)?)?;
    m.add_function(wrap_pyfunction!(rainbow_profile, m)?)?;
    m.add_function(wrap_pyfunction!(sample_chain_state, m)?)?;
    m.add_function(wrap_pyfunction!(build_chain_state, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_of_interval, m)?)?;
    m.add_function(wrap_pyfunction!(distillable_between, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_ed, m)?)?;
    m.add_function(wrap_pyfunction!(run_census, m)?)?;
    m.add_function(wrap_pyfunction!(power_law_fit, m)?)?;
    m.add("MAX_PAIR_INFO", fermion::MAX_PAIR_INFO)?;
    Ok(())
}
