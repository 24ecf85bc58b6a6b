//! Native JSON case schema.
//!
//! The document mirrors [`GridCase`] field by field:
//!
//! ```json
//! {
//!   "name": "toy",
//!   "base_mva": 100.0,
//!   "buses": [{ "id": 1, "load": 0.0, "reference": true }],
//!   "lines": [{ "id": 1, "from_bus": 1, "to_bus": 2,
//!               "susceptance": 10.0, "limit": 150.0, "in_service": true }],
//!   "generators": [{ "id": 1, "at_bus": 1, "p_min": 0.0, "p_max": 200.0,
//!                    "cost": 10.0 }]
//! }
//! ```
//!
//! `limit` may be omitted or `null` for an unbounded line; `reference` and
//! `in_service` default to `false` and `true`. A generator may carry
//! `cost_points`, a list of `{ "mw": ..., "cost": ... }` breakpoints forming a
//! convex piecewise-linear curve. `base_mva` defaults to 100 when absent.

use serde::{Deserialize, Serialize};

use super::{Bus, CaseError, Generator, GridCase, Line};

#[derive(Serialize, Deserialize)]
struct CaseDoc {
    #[serde(default)]
    name: String,
    #[serde(default = "default_base")]
    base_mva: f64,
    buses: Vec<Bus>,
    lines: Vec<Line>,
    generators: Vec<Generator>,
}

fn default_base() -> f64 {
    100.0
}

pub fn from_json(source: &str) -> Result<GridCase, CaseError> {
    let doc: CaseDoc = serde_json::from_str(source).map_err(|e| CaseError::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    GridCase::new(doc.name, doc.base_mva, doc.buses, doc.lines, doc.generators)
}

pub fn to_json(case: &GridCase) -> String {
    let doc = CaseDoc {
        name: case.name.clone(),
        base_mva: case.base_mva,
        buses: case.buses.clone(),
        lines: case.lines.clone(),
        generators: case.generators.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("case serializes")
}

#[cfg(test)]
mod tests {
    use super::super::{BusId, GenId, LineId};
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn json_round_trip_small() {
        let src = r#"{
            "name": "pair",
            "buses": [{"id": 1, "load": 0.0, "reference": true},
                      {"id": 2, "load": 50.0}],
            "lines": [{"id": 1, "from_bus": 1, "to_bus": 2, "susceptance": 5.0}],
            "generators": [{"id": 1, "at_bus": 1, "p_min": 0.0, "p_max": 80.0, "cost": 12.5}]
        }"#;
        let case = GridCase::load_case(src).unwrap();
        assert_eq!(case.base_mva, 100.0, "default base");
        assert_eq!(case.lines[0].limit, None);
        let back = GridCase::load_case(&case.to_json()).unwrap();
        assert_eq!(case.buses, back.buses);
        assert_eq!(case.lines, back.lines);
        assert_eq!(case.generators, back.generators);
    }

    proptest! {
        // Serialization round-trip over randomly shaped (valid) cases.
        #[test]
        fn round_trip_random_cases(n_bus in 2usize..8, seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let buses: Vec<Bus> = (0..n_bus)
                .map(|i| Bus { id: BusId(i as u32 + 1), load: rng.gen_range(0.0..100.0), is_reference: i == 0 })
                .collect();
            let mut lines = Vec::new();
            for i in 1..n_bus {
                let parent = rng.gen_range(0..i);
                lines.push(Line {
                    id: LineId(i as u32),
                    from_bus: buses[parent].id,
                    to_bus: buses[i].id,
                    susceptance: rng.gen_range(0.5..20.0),
                    limit: if rng.gen_bool(0.5) { Some(rng.gen_range(10.0..500.0)) } else { None },
                    in_service: rng.gen_bool(0.9),
                });
            }
            let generators = vec![Generator {
                id: GenId(1),
                at_bus: buses[0].id,
                p_min: 0.0,
                p_max: 1000.0,
                cost: rng.gen_range(5.0..50.0),
                cost_points: None,
            }];
            let case = GridCase::new("prop", 100.0, buses, lines, generators).unwrap();
            let back = super::from_json(&case.to_json()).unwrap();
            prop_assert_eq!(case.buses, back.buses);
            prop_assert_eq!(case.lines, back.lines);
            prop_assert_eq!(case.generators, back.generators);
            prop_assert_eq!(case.base_mva, back.base_mva);
        }
    }
}
