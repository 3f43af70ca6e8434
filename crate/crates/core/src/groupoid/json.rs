use serde::{Deserialize, Serialize};

use super::{Arrow, ArrowId, FiniteGroupoid, GroupoidError, ObjectId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrowJson {
    pub id: ArrowId,
    pub src: ObjectId,
    pub tgt: ObjectId,
}

/// Interchange form of a [`FiniteGroupoid`]. Tables are emitted in
/// lexicographic order so a load/save round trip is byte-stable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupoidJson {
    pub objects: Vec<ObjectId>,
    pub arrows: Vec<ArrowJson>,
    pub mult: Vec<[ArrowId; 3]>,
    pub inv: Vec<[ArrowId; 2]>,
    pub unit: Vec<[usize; 2]>,
}

impl From<&FiniteGroupoid> for GroupoidJson {
    fn from(g: &FiniteGroupoid) -> Self {
        GroupoidJson {
            objects: (0..g.n_objects()).collect(),
            arrows: g
                .arrows()
                .iter()
                .enumerate()
                .map(|(id, a)| ArrowJson {
                    id,
                    src: a.src,
                    tgt: a.tgt,
                })
                .collect(),
            mult: g.products().into_iter().map(|(a, b, c)| [a, b, c]).collect(),
            inv: (0..g.n_arrows()).map(|a| [a, g.inv(a)]).collect(),
            unit: (0..g.n_objects()).map(|o| [o, g.unit(o)]).collect(),
        }
    }
}

impl TryFrom<GroupoidJson> for FiniteGroupoid {
    type Error = GroupoidError;

    fn try_from(j: GroupoidJson) -> Result<Self, GroupoidError> {
        for (k, &o) in j.objects.iter().enumerate() {
            if o != k {
                return Err(GroupoidError::Json(format!("object ids must be 0..n in order, found {o} at {k}")));
            }
        }
        let mut arrows = Vec::with_capacity(j.arrows.len());
        for (k, a) in j.arrows.iter().enumerate() {
            if a.id != k {
                return Err(GroupoidError::NonDenseArrowId { expected: k, found: a.id });
            }
            arrows.push(Arrow { src: a.src, tgt: a.tgt });
        }
        let mult: Vec<_> = j.mult.iter().map(|m| (m[0], m[1], m[2])).collect();
        let inv: Vec<_> = j.inv.iter().map(|m| (m[0], m[1])).collect();
        let unit: Vec<_> = j.unit.iter().map(|m| (m[0], m[1])).collect();
        FiniteGroupoid::from_tables(j.objects.len(), arrows, &mult, &inv, &unit)
    }
}

impl FiniteGroupoid {
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(GroupoidJson::from(self)).expect("groupoid json");
        serde_json::to_string_pretty(&value).expect("groupoid json")
    }

    pub fn from_json(text: &str) -> Result<Self, GroupoidError> {
        let j: GroupoidJson = serde_json::from_str(text).map_err(|e| GroupoidError::Json(e.to_string()))?;
        FiniteGroupoid::try_from(j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{pair_groupoid, pair_times_group, GroupTable};

    #[test]
    fn round_trip_is_byte_stable() {
        for g in [pair_groupoid(3), pair_times_group(2, &GroupTable::cyclic(3))] {
            let text = g.to_json();
            let back = FiniteGroupoid::from_json(&text).unwrap();
            assert_eq!(back, g);
            assert_eq!(back.to_json(), text);
        }
    }

    #[test]
    fn keys_are_sorted() {
        let text = pair_groupoid(1).to_json();
        let order: Vec<usize> = ["\"arrows\"", "\"inv\"", "\"mult\"", "\"objects\"", "\"unit\""]
            .iter()
            .map(|k| text.find(k).unwrap())
            .collect();
        assert!(order.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn dangling_references_in_json_are_structural() {
        let text = r#"{"objects":[0],"arrows":[{"id":0,"src":0,"tgt":0}],"mult":[[0,0,0]],"inv":[[0,0]],"unit":[[0,4]]}"#;
        assert!(matches!(FiniteGroupoid::from_json(text), Err(GroupoidError::DanglingId { .. })));
    }
}
