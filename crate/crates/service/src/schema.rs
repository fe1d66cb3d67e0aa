//! JSON Schemas of every response body, shipped with the crate.

/// `(name, schema)` per payload; names match the endpoint paths.
pub const SCHEMAS: &[(&str, &str)] = &[
    ("health", include_str!("../schemas/health.v1.schema.json")),
    ("grants", include_str!("../schemas/grants.v1.schema.json")),
    ("fields", include_str!("../schemas/fields.v1.schema.json")),
    ("pis", include_str!("../schemas/pis.v1.schema.json")),
    ("landscape", include_str!("../schemas/landscape.v1.schema.json")),
    ("impact-types", include_str!("../schemas/impact-types.v1.schema.json")),
    ("entity-distribution", include_str!("../schemas/entity-distribution.v1.schema.json")),
    ("topic-keywords", include_str!("../schemas/topic-keywords.v1.schema.json")),
    ("predictions", include_str!("../schemas/predictions.v1.schema.json")),
    ("error", include_str!("../schemas/error.v1.schema.json")),
];

pub fn schema(name: &str) -> Option<&'static str> {
    SCHEMAS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Schema name of an API path such as `/api/topics/grant:A/keywords`.
pub fn schema_for_path(path: &str) -> Option<&'static str> {
    let rest = path.strip_prefix("/api/")?;
    let name = if rest.starts_with("topics/") && rest.ends_with("/keywords") {
        "topic-keywords"
    } else {
        rest
    };
    SCHEMAS.iter().map(|(n, _)| *n).find(|n| *n == name && *n != "error")
}
