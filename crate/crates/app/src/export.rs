//! CSV export: every per-interval map flattened to one row per interval.

use crate::bundle::{AnalysisBundle, AnalysisResult, ConditionDto};
use crate::real::to_hex;

fn conditions(r: &AnalysisResult) -> Vec<&ConditionDto> {
    match r {
        AnalysisResult::Condition(c) => vec![c],
        AnalysisResult::ConditionPair { first, second } => vec![first, second],
        AnalysisResult::Testing { first, second } => vec![&first.report, &second.report],
        AnalysisResult::SigmaK(s) => s.per_k.iter().chain([&s.aggregate]).collect(),
        _ => Vec::new(),
    }
}

/// Columns `analysis, name, level, pos, value, value_hex`. Values are
/// written in shortest round-trip decimal with the exact hex beside them.
pub fn to_csv(bundle: &AnalysisBundle) -> csv::Result<String> {
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(["analysis", "name", "level", "pos", "value", "value_hex"])?;
    for rec in &bundle.analyses {
        let Some(result) = &rec.result else { continue };
        let analysis = rec.id.name();
        for (k, c) in conditions(result).into_iter().enumerate() {
            // sigma_k reports share a name; tell them apart by index
            let name = match result {
                AnalysisResult::SigmaK(s) if k < s.per_k.len() => format!("{}[{k}]", c.name),
                _ => c.name.clone(),
            };
            for iv in &c.per_interval {
                out.write_record([
                    analysis.as_str(),
                    name.as_str(),
                    &iv.level.to_string(),
                    &iv.pos.to_string(),
                    &iv.value.0.to_string(),
                    &to_hex(iv.value.0),
                ])?;
            }
        }
    }
    let bytes = out.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{AnalysisId, ScenarioConfig};
    use crate::scenario::run_scenario;

    #[test]
    fn flattens_per_interval_maps() {
        let cfg = ScenarioConfig::from_toml(
            "depth = 2\nanalyses = [\"cond_12\", \"t0_norm\"]\n\
             [weight_spec_v]\nkind = \"explicit\"\nvalues = [1, 2, 3, 4]\n\
             [weight_spec_w]\nkind = \"constant\"\nvalue = 2.0\n",
        )
        .unwrap();
        let b = run_scenario(&cfg).unwrap();
        let text = to_csv(&b).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows[0], "analysis,name,level,pos,value,value_hex");
        // cond_12 lives on the three internal intervals; t0_norm has no map
        assert_eq!(rows.len(), 4);
        assert!(rows[1].starts_with("cond_12,cond_12,0,0,"));
        assert!(b.record(AnalysisId::T0Norm).is_some());
    }
}
