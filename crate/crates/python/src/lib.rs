use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use uamsched::analysis::{
    compute_bottleneck, demand_rate, max_flow, star_feasibility, to_f64, PeriodicDemandSpec,
};
use uamsched::cases;
use uamsched::io::{self, DemandFile, NetworkFile, ScheduleFile};
use uamsched::model::{audit_schedule, sod_lower_bound, Information};
use uamsched::scheduler::{
    event_scheduler, oracle_optimal, BnbConfig, Budget, SchedulerConfig, SchedulerState,
};
use uamsched::simulator::{replay_audit, run_simulation, trace_csv, SimConfig};
use uamsched::{Demand, Duration, TimePoint};

fn value_err(e: uamsched::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn minutes(m: f64) -> PyResult<TimePoint> {
    TimePoint::from_minutes(m).map_err(value_err)
}

fn scheduler_config(
    k0: usize,
    budget_nodes: Option<u64>,
    budget_ms: Option<u64>,
) -> SchedulerConfig {
    let budget = match (budget_nodes, budget_ms) {
        (Some(n), _) => Budget::Nodes(n),
        (None, Some(ms)) => Budget::Time(std::time::Duration::from_millis(ms)),
        (None, None) => Budget::default(),
    };
    SchedulerConfig {
        k0,
        bnb: BnbConfig {
            budget,
            ..BnbConfig::default()
        },
        ..SchedulerConfig::default()
    }
}

/// A validated network.
#[pyclass(name = "Network", frozen)]
struct PyNetwork {
    inner: uamsched::Network,
}

#[pymethods]
impl PyNetwork {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyNetwork {
            inner: io::parse_network(text).map_err(value_err)?,
        })
    }

    /// Bundled case: "two_link", "fig3" or "atlanta".
    #[staticmethod]
    fn case(name: &str) -> PyResult<Self> {
        let inner = match name {
            "two_link" => cases::two_link(),
            "fig3" => cases::fig3(),
            "atlanta" => cases::atlanta(),
            _ => return Err(PyValueError::new_err(format!("unknown case `{name}`"))),
        };
        Ok(PyNetwork { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&NetworkFile::from_network(&self.inner))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    #[getter]
    fn nodes(&self) -> Vec<String> {
        self.inner.nodes().iter().map(|n| n.name.clone()).collect()
    }

    #[getter]
    fn routes(&self) -> Vec<String> {
        self.inner.routes().iter().map(|r| r.name.clone()).collect()
    }

    /// Maximum throughput per minute as (float, exact fraction).
    fn max_flow(&self) -> PyResult<(f64, String)> {
        let flow = max_flow(&self.inner).map_err(value_err)?;
        Ok((to_f64(&flow.objective), flow.objective.to_string()))
    }

    fn bottleneck(&self) -> PyResult<Vec<String>> {
        let flow = max_flow(&self.inner).map_err(value_err)?;
        let b = compute_bottleneck(&self.inner, &flow).map_err(value_err)?;
        Ok(b.nodes
            .iter()
            .map(|&v| self.inner.node(v).name.clone())
            .collect())
    }

    /// Long-run feasibility of a star network under periodic demand.
    fn star_feasible(&self, period_min: f64, per_period: Vec<u32>) -> PyResult<bool> {
        let spec = PeriodicDemandSpec {
            period: Duration::from_minutes(period_min).map_err(value_err)?,
            per_period,
        };
        let rates = demand_rate(&spec).map_err(value_err)?;
        Ok(star_feasibility(&self.inner, &rates)
            .map_err(value_err)?
            .feasible)
    }

    fn __repr__(&self) -> String {
        format!(
            "Network({} nodes, {} routes)",
            self.inner.nodes().len(),
            self.inner.routes().len()
        )
    }
}

/// Demands bound to one network.
#[pyclass(name = "Demands", frozen)]
struct PyDemands {
    inner: Vec<Demand>,
}

#[pymethods]
impl PyDemands {
    #[staticmethod]
    fn from_json(network: &PyNetwork, text: &str) -> PyResult<Self> {
        Ok(PyDemands {
            inner: io::parse_demands(text, &network.inner).map_err(value_err)?,
        })
    }

    /// Demands of a bundled case: "two_link", "atlanta", "fig3_dynamic" or "fig3_static200".
    #[staticmethod]
    #[pyo3(signature = (network, name, seed=0))]
    fn case(network: &PyNetwork, name: &str, seed: u64) -> PyResult<Self> {
        let net = &network.inner;
        let inner = match name {
            "two_link" => cases::two_link_demands(net),
            "atlanta" => cases::atlanta_demands(net),
            "fig3_dynamic" => cases::fig3_dynamic_demands(net, seed),
            "fig3_static200" => cases::fig3_static200_demands(net, seed),
            _ => {
                return Err(PyValueError::new_err(format!(
                    "unknown demand case `{name}`"
                )))
            }
        };
        Ok(PyDemands { inner })
    }

    fn to_json(&self, network: &PyNetwork) -> PyResult<String> {
        serde_json::to_string_pretty(&DemandFile::from_demands(&network.inner, &self.inner))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    /// Capacity-free SoD bound in minutes.
    fn lower_bound(&self, network: &PyNetwork) -> f64 {
        sod_lower_bound(&network.inner, &self.inner).as_minutes()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Schedules at one instant and returns the schedule JSON.
#[pyfunction]
#[pyo3(signature = (network, demands, now_min=0.0, static_=false, k0=32, budget_nodes=None, budget_ms=None))]
fn schedule(
    network: &PyNetwork,
    demands: &PyDemands,
    now_min: f64,
    static_: bool,
    k0: usize,
    budget_nodes: Option<u64>,
    budget_ms: Option<u64>,
) -> PyResult<String> {
    let net = &network.inner;
    let now = if static_ {
        TimePoint::NEG_INF
    } else {
        minutes(now_min)?
    };
    let mut state = SchedulerState::new();
    state
        .submit(demands.inner.iter().map(|d| {
            if static_ {
                d.clone().released_at(TimePoint::NEG_INF)
            } else {
                d.clone()
            }
        }))
        .map_err(value_err)?;
    event_scheduler(
        net,
        &mut state,
        now,
        &scheduler_config(k0, budget_nodes, budget_ms),
    )
    .map_err(value_err)?;
    let complete = state.schedule.len() == demands.inner.len();
    let file = ScheduleFile::from_schedule(
        net,
        &state.schedule,
        sod_lower_bound(net, &demands.inner),
        complete,
    );
    Ok(file.to_json())
}

/// Exact minimum-SoD schedule JSON for at most six demands, or None.
#[pyfunction]
#[pyo3(signature = (network, demands, now_min=None))]
fn oracle(
    network: &PyNetwork,
    demands: &PyDemands,
    now_min: Option<f64>,
) -> PyResult<Option<String>> {
    let net = &network.inner;
    let floor = match now_min {
        Some(m) => minutes(m)?,
        None => TimePoint::NEG_INF,
    };
    Ok(oracle_optimal(net, &demands.inner, floor)
        .map_err(value_err)?
        .map(|(s, _)| {
            ScheduleFile::from_schedule(net, &s, sod_lower_bound(net, &demands.inner), true)
                .to_json()
        }))
}

/// Worst-case audit of a schedule JSON; returns the violations as text.
#[pyfunction]
fn audit(network: &PyNetwork, demands: &PyDemands, schedule_json: &str) -> PyResult<Vec<String>> {
    let file: ScheduleFile = io::from_json(schedule_json).map_err(value_err)?;
    let s = file
        .to_schedule(&network.inner, &demands.inner)
        .map_err(value_err)?;
    Ok(audit_schedule(&s, &network.inner, Information::WorstCase)
        .violations
        .iter()
        .map(|v| v.to_string())
        .collect())
}

/// Runs a seeded simulation and returns a summary dict.
#[pyfunction]
#[pyo3(signature = (network, demands, seed=0, k0=32, budget_nodes=Some(20_000), horizon_min=100_000.0))]
fn simulate<'py>(
    py: Python<'py>,
    network: &PyNetwork,
    demands: &PyDemands,
    seed: u64,
    k0: usize,
    budget_nodes: Option<u64>,
    horizon_min: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let net = &network.inner;
    let sim = SimConfig {
        seed,
        horizon: minutes(horizon_min)?,
        ..SimConfig::default()
    };
    let trace = run_simulation(
        net,
        &demands.inner,
        &scheduler_config(k0, budget_nodes, None),
        &sim,
    )
    .map_err(value_err)?;
    let report = replay_audit(&trace, net);
    let out = PyDict::new(py);
    out.set_item("completed", trace.completed(net))?;
    out.set_item(
        "dropped",
        trace.dropped.iter().map(|d| d.0).collect::<Vec<_>>(),
    )?;
    out.set_item("scheduled_sod_min", trace.scheduled_sod.as_minutes())?;
    out.set_item("realized_sod_min", trace.realized_sod.as_minutes())?;
    out.set_item(
        "violations",
        report
            .violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>(),
    )?;
    out.set_item("window_breaches", trace.breaches.len())?;
    out.set_item("trace_csv", trace_csv(net, &trace))?;
    Ok(out)
}

#[pymodule]
fn uamsched_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetwork>()?;
    m.add_class::<PyDemands>()?;
    m.add_function(wrap_pyfunction!(schedule, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(audit, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
