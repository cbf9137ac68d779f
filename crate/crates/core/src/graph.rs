//! Entity/relation scenes of objective context.
//!
//! A [`ContextGraph`] holds entities (a person, a lesson, a classroom) and
//! labeled directed edges between them ("shen" `Attend` "lesson"). Triples
//! have set semantics and every edge endpoint must exist.
//!
//! The flat-file form is JSON Lines, one record per line:
//!
//! ```text
//! ["E",<id>,<category>,<aspect or null>,{<attribute>:<value>,...}]
//! ["R",<source>,<label>,<target>]
//! ```
//!
//! Export writes entities sorted by id, then relations sorted by
//! `(source, label, target)`, so exporting an imported canonical file
//! reproduces it byte for byte.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::Value;

use crate::error::{Error, Result};
use crate::ontology::{AspectId, Ontology};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub id: String,
    /// Ontological class, e.g. `Person`.
    pub category: String,
    pub attributes: BTreeMap<String, String>,
    pub aspect: Option<AspectId>,
}

impl Entity {
    pub fn new(id: impl Into<String>, category: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            category: category.into(),
            attributes: BTreeMap::new(),
            aspect: None,
        }
    }

    pub fn with_attr(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.attributes.insert(name.into(), value.into());
        self
    }

    pub fn tagged(mut self, aspect: AspectId) -> Self {
        self.aspect = Some(aspect);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relation {
    pub source: String,
    pub label: String,
    pub target: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContextGraph {
    entities: BTreeMap<String, Entity>,
    relations: BTreeSet<Relation>,
}

impl ContextGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.get(id)
    }

    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    pub fn relations(&self) -> impl Iterator<Item = &Relation> {
        self.relations.iter()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    /// Inserts or replaces the entity with the same id.
    pub fn upsert_entity(&mut self, entity: Entity) -> Result<()> {
        if entity.id.is_empty() {
            return Err(Error::Graph("entity id is empty".into()));
        }
        if entity.category.is_empty() {
            return Err(Error::Graph(format!("entity `{}` has an empty category", entity.id)));
        }
        self.entities.insert(entity.id.clone(), entity);
        Ok(())
    }

    /// Removes an entity together with every relation touching it.
    pub fn remove_entity(&mut self, id: &str) -> Option<Entity> {
        let removed = self.entities.remove(id)?;
        self.relations.retain(|r| r.source != id && r.target != id);
        Some(removed)
    }

    pub fn assert_relation(&mut self, source: &str, label: &str, target: &str) -> Result<()> {
        for id in [source, target] {
            if !self.entities.contains_key(id) {
                return Err(Error::UnknownEntity(id.to_string()));
            }
        }
        if label.is_empty() {
            return Err(Error::Graph("relation label is empty".into()));
        }
        self.relations.insert(Relation {
            source: source.to_string(),
            label: label.to_string(),
            target: target.to_string(),
        });
        Ok(())
    }

    pub fn retract_relation(&mut self, source: &str, label: &str, target: &str) -> bool {
        self.relations.remove(&Relation {
            source: source.to_string(),
            label: label.to_string(),
            target: target.to_string(),
        })
    }

    /// Entities tagged with `aspect`, ordered by id.
    pub fn query_context(&self, aspect: AspectId) -> Vec<&Entity> {
        self.entities
            .values()
            .filter(|e| e.aspect == Some(aspect))
            .collect()
    }

    pub fn outgoing<'a>(&'a self, source: &'a str) -> impl Iterator<Item = &'a Relation> + 'a {
        self.relations.iter().filter(move |r| r.source == source)
    }

    /// Checks that `Subjective` attributes name labels of the entity's aspect.
    pub fn check_against(&self, ontology: &Ontology) -> Result<()> {
        for entity in self.entities.values() {
            if let (Some(aspect), Some(label)) = (entity.aspect, entity.attributes.get("Subjective")) {
                if !ontology.validate_label(aspect, label) {
                    return Err(Error::Graph(format!(
                        "entity `{}` has subjective label `{label}` outside the {aspect} vocabulary",
                        entity.id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn export(&self) -> String {
        let mut out = String::new();
        for e in self.entities.values() {
            let attrs: serde_json::Map<String, Value> = e
                .attributes
                .iter()
                .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                .collect();
            let line = Value::Array(vec![
                "E".into(),
                e.id.clone().into(),
                e.category.clone().into(),
                e.aspect.map_or(Value::Null, |a| a.as_str().into()),
                Value::Object(attrs),
            ]);
            out.push_str(&line.to_string());
            out.push('\n');
        }
        for r in &self.relations {
            let line = Value::Array(vec![
                "R".into(),
                r.source.clone().into(),
                r.label.clone().into(),
                r.target.clone().into(),
            ]);
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses the flat-file form. Entity lines may appear anywhere;
    /// relations are resolved after all entities are loaded.
    pub fn import(text: &str) -> Result<Self> {
        let mut graph = ContextGraph::new();
        let mut pending = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let value: Value = serde_json::from_str(raw)
                .map_err(|e| Error::parse_at_line("graph", line_no, e.to_string()))?;
            let fields = value
                .as_array()
                .ok_or_else(|| Error::parse_at_line("graph", line_no, "expected a JSON array"))?;
            let text_at = |i: usize| -> Result<String> {
                fields
                    .get(i)
                    .and_then(Value::as_str)
                    .map(str::to_string)
                    .ok_or_else(|| Error::parse_at_line("graph", line_no, format!("field {i} must be a string")))
            };
            match fields.first().and_then(Value::as_str) {
                Some("E") if fields.len() == 5 => {
                    let aspect = match &fields[3] {
                        Value::Null => None,
                        Value::String(s) => Some(
                            s.parse::<AspectId>()
                                .map_err(|e| Error::parse_at_line("graph", line_no, e.to_string()))?,
                        ),
                        _ => return Err(Error::parse_at_line("graph", line_no, "aspect must be a string or null")),
                    };
                    let attrs = fields[4]
                        .as_object()
                        .ok_or_else(|| Error::parse_at_line("graph", line_no, "attributes must be an object"))?;
                    let mut attributes = BTreeMap::new();
                    for (k, v) in attrs {
                        let v = v.as_str().ok_or_else(|| {
                            Error::parse_at_line("graph", line_no, format!("attribute `{k}` must be a string"))
                        })?;
                        attributes.insert(k.clone(), v.to_string());
                    }
                    let entity = Entity {
                        id: text_at(1)?,
                        category: text_at(2)?,
                        attributes,
                        aspect,
                    };
                    if graph.entities.contains_key(&entity.id) {
                        return Err(Error::parse_at_line("graph", line_no, format!("duplicate entity `{}`", entity.id)));
                    }
                    graph
                        .upsert_entity(entity)
                        .map_err(|e| Error::parse_at_line("graph", line_no, e.to_string()))?;
                }
                Some("R") if fields.len() == 4 => {
                    pending.push((line_no, text_at(1)?, text_at(2)?, text_at(3)?));
                }
                _ => return Err(Error::parse_at_line("graph", line_no, "expected an E or R record")),
            }
        }
        for (line_no, source, label, target) in pending {
            graph
                .assert_relation(&source, &label, &target)
                .map_err(|e| Error::parse_at_line("graph", line_no, e.to_string()))?;
        }
        Ok(graph)
    }

    /// The classroom scene: a PhD student attending a lesson held in a
    /// classroom, with only the nodes and edges named in the model's
    /// running example.
    pub fn lesson_scene() -> Self {
        let mut g = ContextGraph::new();
        let entities = [
            Entity::new("shen", "Person")
                .with_attr("Name", "Shen")
                .with_attr("Role", "PhD student")
                .with_attr("Subjective", "friend")
                .tagged(AspectId::Wo),
            Entity::new("lesson", "Lesson")
                .with_attr("Subjective", "study")
                .tagged(AspectId::Wa),
            Entity::new("classroom", "Classroom")
                .with_attr("Address", "Via Sommarive, 9, 38123 Povo TN")
                .with_attr("Subjective", "classroom")
                .tagged(AspectId::We),
            Entity::new("morning", "TimeInterval")
                .with_attr("Start", "2020-02-17T11:00")
                .with_attr("Subjective", "morning")
                .tagged(AspectId::Time),
        ];
        for e in entities {
            g.upsert_entity(e).expect("scene entities are valid");
        }
        for (s, l, t) in [
            ("shen", "Attend", "lesson"),
            ("lesson", "LocatedIn", "classroom"),
            ("lesson", "HappensAt", "morning"),
        ] {
            g.assert_relation(s, l, t).expect("scene endpoints exist");
        }
        g
    }
}
