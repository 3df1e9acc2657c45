//! Render an [`SdeSystem`] back to model-DSL text. `parse ∘ print` is the
//! identity on the system value.

use std::fmt::Write;

use super::{DriverKind, InitDist, SdeSystem};

impl SdeSystem {
    pub fn to_model_text(&self) -> String {
        let mut s = String::from("system {\n");
        for d in &self.drivers {
            let kind = match d.kind {
                DriverKind::Brownian => "brownian".to_string(),
                DriverKind::Poisson(rate) => format!("poisson({rate})"),
                DriverKind::Time => "time".to_string(),
                DriverKind::Constant(v) => format!("constant({v})"),
            };
            writeln!(s, "  exogenous {}: {kind};", d.name).unwrap();
        }
        for (name, value) in &self.labels {
            writeln!(s, "  label {name} = {value};").unwrap();
        }
        for p in &self.processes {
            writeln!(s, "  process {} {{", p.name).unwrap();
            let init = match p.init {
                InitDist::Constant(v) => format!("constant({v})"),
                InitDist::Normal { mean, var } => format!("normal({mean}, {var})"),
            };
            writeln!(s, "    init = {init};").unwrap();
            writeln!(s, "    alpha = {{{}}};", p.alpha.join(", ")).unwrap();
            writeln!(s, "    beta = {{{}}};", p.beta.join(", ")).unwrap();
            let gs: Vec<String> = p.integrands.iter().map(|e| e.to_string()).collect();
            writeln!(s, "    g = [{}];", gs.join(", ")).unwrap();
            if p.markov {
                writeln!(s, "    markov = true;").unwrap();
            }
            writeln!(s, "  }}").unwrap();
        }
        writeln!(s, "  horizon {};", self.horizon).unwrap();
        s.push_str("}\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use crate::model::parse_model;
    use crate::verify::fixtures;

    #[test]
    fn parse_print_round_trip() {
        for text in [
            fixtures::CYCLIC4_MODEL,
            fixtures::LINEAR4_MODEL,
            fixtures::OU_MODEL,
            fixtures::POISSON_COUNTER_MODEL,
            fixtures::CHAIN3_MODEL,
        ] {
            let sys = parse_model(text).unwrap().system;
            let printed = sys.to_model_text();
            let reparsed = parse_model(&printed).unwrap().system;
            assert_eq!(reparsed, sys, "round trip failed for:\n{printed}");
        }
    }
}
