//! MATPOWER `.m` case parser.
//!
//! Reads the `mpc.baseMVA`, `mpc.bus`, `mpc.branch`, `mpc.gen`, and
//! `mpc.gencost` tables of a MATPOWER version-2 case file. AC-only quantities
//! (resistance, charging, taps, voltage data) are parsed and ignored; branch
//! reactance is converted to susceptance (`b = 1/x`). Quadratic cost rows are
//! linearized at `p_max / 2` so the optimal power flow stays an LP with
//! well-defined dual prices; piecewise-linear cost rows are kept as convex
//! breakpoint curves.

use std::collections::HashMap;

use super::{Bus, BusId, CaseError, CostPoint, GenId, Generator, GridCase, Line, LineId};

const BUS_I: usize = 0;
const BUS_TYPE: usize = 1;
const BUS_PD: usize = 2;
const BUS_TYPE_REF: f64 = 3.0;

const BR_FROM: usize = 0;
const BR_TO: usize = 1;
const BR_X: usize = 3;
const BR_RATE_A: usize = 5;
const BR_STATUS: usize = 10;

const GEN_BUS: usize = 0;
const GEN_STATUS: usize = 7;
const GEN_PMAX: usize = 8;
const GEN_PMIN: usize = 9;

const COST_MODEL: usize = 0;
const COST_NCOST: usize = 3;
const COST_DATA: usize = 4;
const MODEL_PWL: f64 = 1.0;
const MODEL_POLY: f64 = 2.0;

/// One numeric row plus the source line it started on.
struct Row {
    line_no: usize,
    values: Vec<f64>,
}

struct Tables {
    base_mva: Option<f64>,
    name: String,
    matrices: HashMap<String, Vec<Row>>,
}

pub fn parse(source: &str) -> Result<GridCase, CaseError> {
    let tables = scan(source)?;
    let base_mva = tables.base_mva.unwrap_or(100.0);

    let bus_rows = tables
        .matrices
        .get("bus")
        .ok_or_else(|| CaseError::Parse { line: 0, message: "missing mpc.bus section".into() })?;
    let branch_rows = tables
        .matrices
        .get("branch")
        .ok_or_else(|| CaseError::Parse { line: 0, message: "missing mpc.branch section".into() })?;
    let gen_rows = tables
        .matrices
        .get("gen")
        .ok_or_else(|| CaseError::Parse { line: 0, message: "missing mpc.gen section".into() })?;
    let cost_rows = tables.matrices.get("gencost");

    let mut buses = Vec::with_capacity(bus_rows.len());
    for row in bus_rows {
        let id = field(row, BUS_I, "bus")? as u32;
        let bus_type = field(row, BUS_TYPE, "bus")?;
        let load = field(row, BUS_PD, "bus")?;
        buses.push(Bus { id: BusId(id), load, is_reference: bus_type == BUS_TYPE_REF });
    }

    let mut lines = Vec::with_capacity(branch_rows.len());
    for (i, row) in branch_rows.iter().enumerate() {
        let from = field(row, BR_FROM, "branch")? as u32;
        let to = field(row, BR_TO, "branch")? as u32;
        let x = field(row, BR_X, "branch")?;
        let rate_a = field(row, BR_RATE_A, "branch")?;
        let status = field(row, BR_STATUS, "branch")?;
        let susceptance = if x != 0.0 { 1.0 / x } else { 0.0 };
        lines.push(Line {
            id: LineId(i as u32 + 1),
            from_bus: BusId(from),
            to_bus: BusId(to),
            susceptance,
            limit: if rate_a > 0.0 { Some(rate_a) } else { None },
            in_service: status != 0.0,
        });
    }

    let mut generators = Vec::with_capacity(gen_rows.len());
    for (i, row) in gen_rows.iter().enumerate() {
        let at_bus = field(row, GEN_BUS, "gen")? as u32;
        let status = field(row, GEN_STATUS, "gen")?;
        let p_max = field(row, GEN_PMAX, "gen")?;
        let p_min = field(row, GEN_PMIN, "gen")?;
        if status <= 0.0 {
            log::warn!("skipping out-of-service generator at bus {at_bus} (row {})", i + 1);
            continue;
        }
        let (cost, cost_points) = match cost_rows.and_then(|rows| rows.get(i)) {
            Some(cost_row) => convert_cost(cost_row, p_min, p_max)?,
            None => (0.0, None),
        };
        generators.push(Generator {
            id: GenId(i as u32 + 1),
            at_bus: BusId(at_bus),
            p_min,
            p_max,
            cost,
            cost_points,
        });
    }

    GridCase::new(tables.name, base_mva, buses, lines, generators)
}

/// Converts a gencost row to the internal cost model. Returns the marginal
/// cost in $/MWh plus optional breakpoints.
fn convert_cost(row: &Row, _p_min: f64, p_max: f64) -> Result<(f64, Option<Vec<CostPoint>>), CaseError> {
    let model = field(row, COST_MODEL, "gencost")?;
    let ncost = field(row, COST_NCOST, "gencost")? as usize;
    if model == MODEL_PWL {
        let mut points = Vec::with_capacity(ncost);
        for k in 0..ncost {
            let mw = field(row, COST_DATA + 2 * k, "gencost")?;
            let cost = field(row, COST_DATA + 2 * k + 1, "gencost")?;
            points.push(CostPoint { mw, cost });
        }
        // Average slope doubles as the linear coefficient for callers that
        // ignore the curve.
        let avg = if points.len() >= 2 {
            let (a, b) = (points[0], points[points.len() - 1]);
            (b.cost - a.cost) / (b.mw - a.mw)
        } else {
            0.0
        };
        return Ok((avg, Some(points)));
    }
    if model != MODEL_POLY {
        return Err(CaseError::Parse {
            line: row.line_no,
            message: format!("unsupported gencost model {model}"),
        });
    }
    // Polynomial coefficients come highest power first.
    let mut coeffs = Vec::with_capacity(ncost);
    for k in 0..ncost {
        coeffs.push(field(row, COST_DATA + k, "gencost")?);
    }
    coeffs.reverse(); // now coeffs[k] multiplies p^k
    let c1 = coeffs.get(1).copied().unwrap_or(0.0);
    let c2 = coeffs.get(2).copied().unwrap_or(0.0);
    if coeffs.len() > 3 && coeffs[3..].iter().any(|&c| c != 0.0) {
        return Err(CaseError::Parse {
            line: row.line_no,
            message: "polynomial gencost beyond quadratic is not supported".into(),
        });
    }
    if c2 != 0.0 {
        // Linearize the quadratic at half of p_max.
        let p_eval = p_max / 2.0;
        let marginal = 2.0 * c2 * p_eval + c1;
        log::warn!(
            "gencost row at line {}: quadratic cost linearized at {p_eval:.1} MW -> {marginal:.4} $/MWh",
            row.line_no
        );
        return Ok((marginal, None));
    }
    Ok((c1, None))
}

fn field(row: &Row, idx: usize, table: &str) -> Result<f64, CaseError> {
    row.values.get(idx).copied().ok_or_else(|| CaseError::Parse {
        line: row.line_no,
        message: format!("{table} row has {} fields, needed at least {}", row.values.len(), idx + 1),
    })
}

fn scan(source: &str) -> Result<Tables, CaseError> {
    let mut tables = Tables { base_mva: None, name: String::from("matpower-case"), matrices: HashMap::new() };
    let mut lines = source.lines().enumerate().peekable();

    while let Some((idx, raw)) = lines.next() {
        let line_no = idx + 1;
        let text = strip_comment(raw).trim().to_string();
        if text.is_empty() {
            continue;
        }
        if let Some(rest) = text.strip_prefix("function") {
            if let Some(pos) = rest.find('=') {
                tables.name = rest[pos + 1..].trim().trim_end_matches(';').to_string();
            }
            continue;
        }
        let Some(rest) = text.strip_prefix("mpc.") else { continue };
        let Some(eq) = rest.find('=') else {
            return Err(CaseError::Parse { line: line_no, message: "expected '=' after mpc field".into() });
        };
        let field_name = rest[..eq].trim().to_string();
        let mut value = rest[eq + 1..].trim().to_string();

        if field_name == "baseMVA" {
            let num = value.trim_end_matches(';').trim();
            tables.base_mva = Some(num.parse::<f64>().map_err(|_| CaseError::Parse {
                line: line_no,
                message: format!("invalid baseMVA value {num:?}"),
            })?);
            continue;
        }
        if !value.starts_with('[') {
            continue; // scalar or string field we do not use
        }

        // Accumulate the bracketed matrix, possibly spanning many lines.
        value.remove(0);
        let mut rows: Vec<Row> = Vec::new();
        let mut current_line = line_no;
        loop {
            let (body, done) = match value.find(']') {
                Some(pos) => (value[..pos].to_string(), true),
                None => (value.clone(), false),
            };
            for chunk in body.split(';') {
                let chunk = chunk.trim();
                if chunk.is_empty() {
                    continue;
                }
                let mut values = Vec::new();
                for tok in chunk.split(|c: char| c.is_whitespace() || c == ',') {
                    if tok.is_empty() {
                        continue;
                    }
                    values.push(tok.parse::<f64>().map_err(|_| CaseError::Parse {
                        line: current_line,
                        message: format!("invalid number {tok:?} in mpc.{field_name}"),
                    })?);
                }
                if !values.is_empty() {
                    rows.push(Row { line_no: current_line, values });
                }
            }
            if done {
                break;
            }
            match lines.next() {
                Some((idx2, raw2)) => {
                    current_line = idx2 + 1;
                    value = strip_comment(raw2).trim().to_string();
                }
                None => {
                    return Err(CaseError::Parse {
                        line: current_line,
                        message: format!("unterminated matrix mpc.{field_name}"),
                    })
                }
            }
        }
        tables.matrices.insert(field_name, rows);
    }
    Ok(tables)
}

fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(pos) => &line[..pos],
        None => line,
    }
}
