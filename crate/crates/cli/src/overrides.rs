use serde_json::Value;

/// Applies `key.path=value` to a JSON document. The value is parsed as JSON
/// and falls back to a plain string. Numeric path segments index arrays.
pub fn apply(doc: &mut Value, spec: &str) -> Result<(), String> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| format!("override '{spec}' is not of the form key.path=value"))?;
    if path.is_empty() {
        return Err(format!("override '{spec}' has an empty key"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let segments: Vec<&str> = path.split('.').collect();
    let mut node = doc;
    for (depth, seg) in segments.iter().enumerate() {
        let last = depth + 1 == segments.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(seg.to_string(), value);
                    return Ok(());
                }
                map.entry(seg.to_string())
                    .or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| format!("override '{path}': '{seg}' is not an array index"))?;
                let len = items.len();
                let slot = items.get_mut(idx).ok_or_else(|| {
                    format!("override '{path}': index {idx} out of range (length {len})")
                })?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => {
                return Err(format!(
                    "override '{path}': '{}' is not an object or array",
                    segments[..depth].join(".")
                ))
            }
        };
    }
    unreachable!("loop returns on the last segment")
}
