use serde_json::Value;

use super::output::csv_text;
use super::sweeps::SweepReport;
use super::ExpError;

/// Column order of the plot tables, by result schema.
pub fn plot_header(schema: &str) -> Option<&'static [&'static str]> {
    Some(match schema {
        "chancode-sweep" => &["N", "R", "pe_mean", "pe_stderr", "seed_batch"],
        "synth-sweep" => &["N", "R", "tv_mean", "tv_stderr", "seed_batch"],
        "separation" => &[
            "quantizer_bits",
            "D_noisy",
            "stderr_noisy",
            "D_pipe",
            "stderr_pipe",
            "excess_bound",
            "D_target",
        ],
        "lemma1" => &["batch", "x_prev", "y_prev", "x", "y", "samples", "lhs", "rhs", "z"],
        _ => return None,
    })
}

fn num(v: &Value, key: &str) -> Result<String, ExpError> {
    v.get(key)
        .filter(|x| x.is_number())
        .map(ToString::to_string)
        .ok_or_else(|| ExpError::Scenario(format!("result lacks numeric field '{key}'")))
}

/// Tidy CSV for a result envelope written by this tool.
pub fn emit_plotdata(result: &Value) -> Result<String, ExpError> {
    let schema = result
        .get("schema")
        .and_then(Value::as_str)
        .ok_or_else(|| ExpError::UnknownSchema("<missing>".into()))?;
    let header = plot_header(schema).ok_or_else(|| ExpError::UnknownSchema(schema.into()))?;
    let body = result.get("result").cloned().unwrap_or(Value::Null);
    let rows: Vec<Vec<String>> = match schema {
        "chancode-sweep" | "synth-sweep" => {
            let report: SweepReport = serde_json::from_value(body)?;
            report.csv_rows()
        }
        "separation" => {
            let target = num(&body, "D_target")?;
            body.get("points")
                .and_then(Value::as_array)
                .map(Vec::as_slice)
                .unwrap_or_default()
                .iter()
                .map(|p| {
                    Ok(vec![
                        num(p, "quantizer_bits")?,
                        num(p, "D_noisy")?,
                        num(p, "stderr_noisy")?,
                        num(p, "D_pipe")?,
                        num(p, "stderr_pipe")?,
                        num(p, "excess_bound")?,
                        target.clone(),
                    ])
                })
                .collect::<Result<_, ExpError>>()?
        }
        "lemma1" => {
            let cells = body.get("cells").cloned().unwrap_or(Value::Array(Vec::new()));
            let cells: Vec<Value> = serde_json::from_value(cells)?;
            let mut rows = Vec::new();
            for c in &cells {
                let list = |key: &str| -> Result<Vec<String>, ExpError> {
                    c.get(key)
                        .and_then(Value::as_array)
                        .map(|a| a.iter().map(ToString::to_string).collect())
                        .ok_or_else(|| ExpError::Scenario(format!("cell lacks '{key}'")))
                };
                let (lhs, rhs, z) = (list("lhs")?, list("rhs")?, list("z")?);
                for y in 0..lhs.len() {
                    rows.push(vec![
                        num(c, "batch")?,
                        num(c, "x_prev")?,
                        num(c, "y_prev")?,
                        num(c, "x")?,
                        y.to_string(),
                        num(c, "samples")?,
                        lhs[y].clone(),
                        rhs[y].clone(),
                        z[y].clone(),
                    ]);
                }
            }
            rows
        }
        _ => unreachable!("header lookup covers every schema"),
    };
    Ok(csv_text(header, &rows))
}
