//! JSON file formats.
//!
//! Family:
//! `{"parties":[{"settings":S,"outcomes":K}],"mode":"float"|"rational","tables":{"s1,…,sN":[…]}}`
//! with row-major tables over `Λ₁×⋯×Λ_N` and 1-based setting labels.
//!
//! Measure: `{"axes":[{"site":n,"setting":s,"outcomes":K}],"atoms":[…]}`,
//! row-major in axis order (1,1),…,(1,S₁),…,(N,S_N). Rational values are
//! `"p/q"` strings; a measure whose atoms are strings is read in rational mode.
//!
//! Quantum scenario: `{"site_dims":[d…],"rho":M,"povms":[[[E…]…]…]}` where
//! `povms[site][setting]` lists one effect per outcome and every matrix is a
//! list of rows of `[re, im]` pairs.
//!
//! LHV verdict: `{"feasible":b,"witness":<measure>|null,"certificate":…|null}`.
//! The certificate's `coefficients` map each 1-based tuple key to a row-major
//! list over that tuple's outcomes, matching the family table layout.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::construct::SignedMeasure;
use crate::error::{Error, Result};
use crate::lp::LhvVerdict;
use crate::quantum::{CMatrix, DensityMatrix, Povm, QuantumScenario};
use crate::scalar::{Mode, Rational, Scalar};
use crate::scenario::{DistributionFamily, Scenario, SettingTuple};
use crate::tensor::Tensor;

/// Text describing the certificate layout, embedded in verdict files.
pub const CERTIFICATE_INDEXING: &str =
    "coefficients[\"s1,...,sN\"][k]: weight of table entry k (row-major over outcomes) at that 1-based setting tuple; \
     the functional is positive on the family and nonpositive on every local deterministic vertex";

#[derive(Debug, Clone, PartialEq)]
pub enum AnyFamily {
    Float(DistributionFamily<f64>),
    Rational(DistributionFamily<Rational>),
}

impl AnyFamily {
    pub fn mode(&self) -> Mode {
        match self {
            AnyFamily::Float(_) => Mode::Float,
            AnyFamily::Rational(_) => Mode::Rational,
        }
    }

    pub fn scenario(&self) -> &Scenario {
        match self {
            AnyFamily::Float(f) => f.scenario(),
            AnyFamily::Rational(f) => f.scenario(),
        }
    }

    pub fn into_mode(self, mode: Mode, tol: f64) -> Result<AnyFamily> {
        Ok(match (self, mode) {
            (AnyFamily::Float(f), Mode::Rational) => AnyFamily::Rational(f.convert(tol)?),
            (AnyFamily::Rational(f), Mode::Float) => AnyFamily::Float(f.convert(tol)?),
            (same, _) => same,
        })
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnyFamily::Float(f) => family_to_json(f),
            AnyFamily::Rational(f) => family_to_json(f),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct PartySpec {
    settings: usize,
    outcomes: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    parties: Vec<PartySpec>,
    #[serde(default = "default_mode")]
    mode: Mode,
    tables: Map<String, Value>,
}

fn default_mode() -> Mode {
    Mode::Float
}

/// Parses a family file. `mode` overrides the file's own mode; float
/// entries are then read as exact decimals.
pub fn parse_family(text: &str, tol: f64, mode: Option<Mode>) -> Result<AnyFamily> {
    let file: FamilyFile = serde_json::from_str(text)?;
    let scenario = Scenario::new(
        file.parties.iter().map(|p| p.settings).collect(),
        file.parties.iter().map(|p| p.outcomes).collect(),
    )?;
    Ok(match mode.unwrap_or(file.mode) {
        Mode::Float => AnyFamily::Float(read_tables(&scenario, &file.tables, tol)?),
        Mode::Rational => AnyFamily::Rational(read_tables(&scenario, &file.tables, tol)?),
    })
}

fn read_tables<T: Scalar>(scenario: &Scenario, tables: &Map<String, Value>, tol: f64) -> Result<DistributionFamily<T>> {
    let mut slots: Vec<Option<Tensor<T>>> = vec![None; scenario.n_tuples()];
    for (key, value) in tables {
        let tuple = SettingTuple::parse_key(key)?;
        let idx = scenario.tuple_index(&tuple)?;
        if slots[idx].is_some() {
            return Err(Error::parse(format!("table {key} given twice")));
        }
        let entries = value
            .as_array()
            .ok_or_else(|| Error::parse(format!("table {key} is not a list")))?
            .iter()
            .map(T::from_json)
            .collect::<Result<Vec<T>>>()?;
        slots[idx] = Some(Tensor::from_vec(scenario.outcomes().to_vec(), entries)?);
    }
    let tables = scenario
        .tuples()
        .zip(slots)
        .map(|(t, s)| s.ok_or_else(|| Error::input(format!("missing table for tuple {}", t.key()))))
        .collect::<Result<Vec<_>>>()?;
    DistributionFamily::new(scenario.clone(), tables, tol)
}

fn parties_json(scenario: &Scenario) -> Value {
    Value::Array(
        scenario
            .settings()
            .iter()
            .zip(scenario.outcomes())
            .map(|(&s, &k)| json!({"settings": s, "outcomes": k}))
            .collect(),
    )
}

fn values_json<T: Scalar>(values: &[T]) -> Value {
    Value::Array(values.iter().map(Scalar::to_json).collect())
}

pub fn family_to_json<T: Scalar>(family: &DistributionFamily<T>) -> Value {
    let mut tables = Map::new();
    for (tuple, table) in family.iter() {
        tables.insert(tuple.key(), values_json(table.data()));
    }
    json!({
        "parties": parties_json(family.scenario()),
        "mode": T::MODE,
        "tables": tables,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnyMeasure {
    Float(SignedMeasure<f64>),
    Rational(SignedMeasure<Rational>),
}

impl AnyMeasure {
    pub fn mode(&self) -> Mode {
        match self {
            AnyMeasure::Float(_) => Mode::Float,
            AnyMeasure::Rational(_) => Mode::Rational,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct AxisSpec {
    site: usize,
    setting: usize,
    outcomes: usize,
}

#[derive(Debug, Deserialize)]
struct MeasureFile {
    axes: Vec<AxisSpec>,
    atoms: Vec<Value>,
}

pub fn measure_to_json<T: Scalar>(measure: &SignedMeasure<T>) -> Value {
    let axes: Vec<Value> = measure
        .axes()
        .iter()
        .map(|a| json!({"site": a.site + 1, "setting": a.setting + 1, "outcomes": a.outcomes}))
        .collect();
    json!({"axes": axes, "atoms": values_json(measure.atoms().data())})
}

fn scenario_from_axes(axes: &[AxisSpec]) -> Result<Scenario> {
    let mut settings: Vec<usize> = Vec::new();
    let mut outcomes: Vec<usize> = Vec::new();
    for a in axes {
        if a.site == 0 || a.setting == 0 {
            return Err(Error::parse("axis labels are 1-based"));
        }
        if a.site == settings.len() + 1 && a.setting == 1 {
            settings.push(1);
            outcomes.push(a.outcomes);
        } else if a.site == settings.len()
            && a.setting == settings[a.site - 1] + 1
            && a.outcomes == outcomes[a.site - 1]
        {
            settings[a.site - 1] += 1;
        } else {
            return Err(Error::parse(format!(
                "axis (site {}, setting {}) is out of the fixed order",
                a.site, a.setting
            )));
        }
    }
    Scenario::new(settings, outcomes)
}

fn read_measure<T: Scalar>(scenario: Scenario, atoms: &[Value], tol: f64) -> Result<SignedMeasure<T>> {
    let data = atoms.iter().map(T::from_json).collect::<Result<Vec<T>>>()?;
    let tensor = Tensor::from_vec(scenario.joint_shape(), data)?;
    SignedMeasure::new(scenario, tensor, tol)
}

/// Parses a measure file and checks normalization.
pub fn parse_measure(text: &str, tol: f64) -> Result<AnyMeasure> {
    let file: MeasureFile = serde_json::from_str(text)?;
    let scenario = scenario_from_axes(&file.axes)?;
    if file.atoms.iter().any(Value::is_string) {
        Ok(AnyMeasure::Rational(read_measure(scenario, &file.atoms, tol)?))
    } else {
        Ok(AnyMeasure::Float(read_measure(scenario, &file.atoms, tol)?))
    }
}

pub fn verdict_to_json<T: Scalar>(verdict: &LhvVerdict<T>) -> Value {
    let certificate = verdict.certificate.as_ref().map(|c| {
        let mut coeffs = Map::new();
        for (tuple, t) in c.scenario().tuples().zip(c.coefficients()) {
            coeffs.insert(tuple.key(), values_json(t.data()));
        }
        json!({"indexing": CERTIFICATE_INDEXING, "coefficients": coeffs})
    });
    json!({
        "mode": T::MODE,
        "feasible": verdict.feasible,
        "witness": verdict.measure.as_ref().map(measure_to_json),
        "certificate": certificate,
    })
}

/// Rows of `[re, im]` pairs.
type MatrixRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Deserialize, Serialize)]
struct QuantumFile {
    site_dims: Vec<usize>,
    rho: MatrixRows,
    povms: Vec<Vec<Vec<MatrixRows>>>,
}

fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::parse("matrix is not square"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn parse_quantum(text: &str, tol: f64) -> Result<QuantumScenario> {
    let file: QuantumFile = serde_json::from_str(text)?;
    let rho = DensityMatrix::new(matrix_from_rows(&file.rho)?, tol)?;
    let povms = file
        .povms
        .iter()
        .map(|site| {
            site.iter()
                .map(|effects| {
                    let mats = effects
                        .iter()
                        .map(|e| matrix_from_rows(e))
                        .collect::<Result<Vec<_>>>()?;
                    Povm::new(mats, tol)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    QuantumScenario::new(file.site_dims, rho, povms)
}

pub fn quantum_to_json(q: &QuantumScenario) -> Value {
    let file = QuantumFile {
        site_dims: q.site_dims().to_vec(),
        rho: matrix_to_rows(q.rho().matrix()),
        povms: q
            .povms()
            .iter()
            .map(|site| {
                site.iter()
                    .map(|p| p.effects().iter().map(matrix_to_rows).collect())
                    .collect()
            })
            .collect(),
    };
    serde_json::to_value(file).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes;
    use crate::scalar::rat;

    const PR_RATIONAL: &str = r#"{
        "parties": [{"settings": 2, "outcomes": 2}, {"settings": 2, "outcomes": 2}],
        "mode": "rational",
        "tables": {
            "1,1": ["1/2", "0", "0", "1/2"],
            "1,2": ["1/2", "0", "0", "1/2"],
            "2,1": ["1/2", "0", "0", "1/2"],
            "2,2": ["0", "1/2", "1/2", "0"]
        }
    }"#;

    #[test]
    fn reads_pr_box_file() {
        let f = parse_family(PR_RATIONAL, 1e-9, None).unwrap();
        assert_eq!(f, AnyFamily::Rational(boxes::pr_box()));
        let back = f.to_json();
        let again = parse_family(&back.to_string(), 1e-9, None).unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn float_file_read_as_rational_is_exact_decimal() {
        let text = r#"{"parties":[{"settings":1,"outcomes":3}],"mode":"float",
                       "tables":{"1":[0.1,0.2,0.7]}}"#;
        let AnyFamily::Rational(f) = parse_family(text, 1e-9, Some(Mode::Rational)).unwrap() else {
            panic!("expected rational")
        };
        assert_eq!(f.tables()[0].data(), &[rat(1, 10), rat(1, 5), rat(7, 10)]);
    }

    #[test]
    fn malformed_families() {
        assert!(matches!(
            parse_family("{\"parties\": [", 1e-9, None),
            Err(Error::Json(_))
        ));
        let missing = r#"{"parties":[{"settings":2,"outcomes":2}],"tables":{"1":[0.5,0.5]}}"#;
        assert!(matches!(parse_family(missing, 1e-9, None), Err(Error::InvalidInput(_))));
        let zero = r#"{"parties":[{"settings":1,"outcomes":2}],"tables":{"0":[0.5,0.5]}}"#;
        assert!(parse_family(zero, 1e-9, None).is_err());
        let unnormalized = r#"{"parties":[{"settings":1,"outcomes":2}],"tables":{"1":[0.5,0.6]}}"#;
        assert!(matches!(
            parse_family(unnormalized, 1e-9, None),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn measure_axes_must_follow_fixed_order() {
        let m = json!({
            "axes": [{"site":1,"setting":2,"outcomes":2}],
            "atoms": [0.5, 0.5]
        });
        assert!(parse_measure(&m.to_string(), 1e-9).is_err());
        let m = json!({
            "axes": [{"site":1,"setting":1,"outcomes":2},{"site":2,"setting":1,"outcomes":3}],
            "atoms": ["1/6","1/6","1/6","1/6","1/6","1/6"]
        });
        let AnyMeasure::Rational(parsed) = parse_measure(&m.to_string(), 1e-9).unwrap() else {
            panic!("expected rational")
        };
        assert_eq!(parsed.scenario().outcomes(), &[2, 3]);
        assert_eq!(measure_to_json(&parsed), m);
    }

    #[test]
    fn quantum_round_trip() {
        let q = crate::quantum::chsh_singlet();
        let text = quantum_to_json(&q).to_string();
        let back = parse_quantum(&text, 1e-9).unwrap();
        assert_eq!(back.site_dims(), q.site_dims());
        assert_eq!(back.scenario(), q.scenario());
    }
}
