//! Reading and writing design documents.
//!
//! Documents are JSON. Fields the reader does not know are kept and written
//! back unchanged, so documents written by newer tools survive a round trip.

mod decode;
mod encode;

use std::collections::BTreeMap;

use serde_json::{Map, Value};

use crate::diag::{has_errors, Diagnostic};
use crate::model::DesignSpec;

pub const FORMAT_VERSION: &str = "1.0.0";
pub const SUPPORTED_MAJOR: u64 = 1;

/// JSON Schema for design documents.
pub const SCHEMA: &str = include_str!("../../../../schema/ea4rca.schema.json");

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDocument {
    pub format_version: String,
    pub metadata: BTreeMap<String, Value>,
    pub design: DesignSpec,
    /// Unrecognised object members keyed by the path of their parent object.
    pub unknown: BTreeMap<String, Map<String, Value>>,
}

impl ConfigDocument {
    pub fn new(design: DesignSpec) -> Self {
        ConfigDocument {
            format_version: FORMAT_VERSION.to_string(),
            metadata: BTreeMap::new(),
            design,
            unknown: BTreeMap::new(),
        }
    }

    /// Application tag recorded by the template generator, if any.
    pub fn app(&self) -> Option<&str> {
        self.metadata.get("app").and_then(Value::as_str)
    }

    pub fn to_value(&self) -> Value {
        encode::document(self)
    }

    pub fn from_value(v: &Value) -> Result<ConfigDocument, Vec<Diagnostic>> {
        let (doc, mut diags) = decode::document(v);
        match doc {
            Some(doc) if !has_errors(&diags) => {
                diags.extend(crate::validate::validate_structure(&doc.design));
                if has_errors(&diags) {
                    Err(diags)
                } else {
                    Ok(doc)
                }
            }
            _ => Err(diags),
        }
    }
}

/// Decodes a document without applying the structural rules. A document is
/// returned whenever its shape could be read, alongside decode diagnostics.
pub fn decode_document(v: &Value) -> (Option<ConfigDocument>, Vec<Diagnostic>) {
    decode::document(v)
}

/// Parses a document and runs the platform-independent structural rules.
/// Any error rejects the whole document.
pub fn parse_design(text: &str) -> Result<ConfigDocument, Vec<Diagnostic>> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        vec![Diagnostic::error(
            crate::diag::Code::Syntax,
            "$",
            format!("line {} column {}: {e}", e.line(), e.column()),
        )]
    })?;
    ConfigDocument::from_value(&value)
}

/// Writes a document as pretty JSON with sorted keys and a trailing newline.
pub fn serialize_design(doc: &ConfigDocument) -> String {
    let mut s = serde_json::to_string_pretty(&doc.to_value()).expect("JSON values always serialize");
    s.push('\n');
    s
}
