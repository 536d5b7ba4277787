//! MATSim-style population XML: persons with attribute blocks and plans.
//!
//! The writer is hand-rolled so emitted files are byte-stable: fixed element
//! order, fixed indentation, shortest round-trip coordinate text, zero-padded
//! `HH:MM:SS` end times, a `<leg>` between consecutive activities and no
//! end time on the final activity. The reader (quick-xml) is lenient about
//! a missing `selected` flag and missing legs.

use std::io::{BufReader, Write};
use std::path::Path;

use quick_xml::events::Event;

use crate::{Error, Result};

/// One `<attribute name=.. class=..>value</attribute>` triple.
#[derive(Clone, Debug, PartialEq)]
pub struct XmlAttribute {
    pub name: String,
    pub class: String,
    pub value: String,
}

/// One `<activity>` element; the end time is absent on the last activity.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanActivity {
    pub activity_type: String,
    pub x: f64,
    pub y: f64,
    pub end_time_seconds: Option<u32>,
}

/// One `<person>`: attribute block, selected plan, interleaved legs.
#[derive(Clone, Debug, PartialEq)]
pub struct Person {
    pub id: String,
    pub attributes: Vec<XmlAttribute>,
    pub selected: bool,
    pub activities: Vec<PlanActivity>,
    /// Travel mode per leg; length is one less than `activities`.
    pub leg_modes: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PopulationDocument {
    pub persons: Vec<Person>,
}

impl Person {
    pub fn attribute(&self, name: &str) -> Option<&str> {
        self.attributes
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.value.as_str())
    }
}

const ALLOWED_CLASSES: [&str; 3] = ["java.lang.String", "java.lang.Double", "java.lang.Boolean"];

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Seconds since midnight as zero-padded `HH:MM:SS`.
pub fn format_time(seconds: u32) -> String {
    format!(
        "{:02}:{:02}:{:02}",
        seconds / 3600,
        (seconds % 3600) / 60,
        seconds % 60
    )
}

fn parse_time(text: &str) -> Option<u32> {
    let mut parts = text.split(':');
    let h: u32 = parts.next()?.parse().ok()?;
    let m: u32 = parts.next()?.parse().ok()?;
    let s: u32 = parts.next()?.parse().ok()?;
    if parts.next().is_some() || m >= 60 || s >= 60 {
        return None;
    }
    Some(h * 3600 + m * 60 + s)
}

/// Serialise a document to a byte-stable string.
pub fn population_xml_to_string(doc: &PopulationDocument) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<population>\n");
    for person in &doc.persons {
        out.push_str(&format!("  <person id=\"{}\">\n", escape(&person.id)));
        if !person.attributes.is_empty() {
            out.push_str("    <attributes>\n");
            for attr in &person.attributes {
                out.push_str(&format!(
                    "      <attribute name=\"{}\" class=\"{}\">{}</attribute>\n",
                    escape(&attr.name),
                    escape(&attr.class),
                    escape(&attr.value)
                ));
            }
            out.push_str("    </attributes>\n");
        }
        out.push_str(&format!(
            "    <plan selected=\"{}\">\n",
            if person.selected { "yes" } else { "no" }
        ));
        for (i, act) in person.activities.iter().enumerate() {
            if i > 0 {
                let mode = person
                    .leg_modes
                    .get(i - 1)
                    .map(String::as_str)
                    .unwrap_or("car");
                out.push_str(&format!("      <leg mode=\"{}\" />\n", escape(mode)));
            }
            out.push_str(&format!(
                "      <activity type=\"{}\" x=\"{}\" y=\"{}\"",
                escape(&act.activity_type),
                act.x,
                act.y
            ));
            if let Some(end) = act.end_time_seconds {
                out.push_str(&format!(" end_time=\"{}\"", format_time(end)));
            }
            out.push_str(" />\n");
        }
        out.push_str("    </plan>\n");
        out.push_str("  </person>\n");
    }
    out.push_str("</population>\n");
    out
}

/// Write a population file; emitted bytes are a pure function of the document.
pub fn write_population_xml(doc: &PopulationDocument, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)
        .map_err(|e| Error::runtime(format!("cannot create {}: {e}", path.display())))?;
    file.write_all(population_xml_to_string(doc).as_bytes())
        .map_err(|e| Error::runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Parse a population file written by [`write_population_xml`] or a
/// MATSim-shaped equivalent. `read(write(doc))` is the identity.
pub fn read_population_xml(path: &Path) -> Result<PopulationDocument> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::input(format!("cannot open {}: {e}", path.display())))?;
    // no text trimming: attribute values keep interior whitespace intact;
    // whitespace between elements is ignored because text only accumulates
    // inside an <attribute> element
    let mut reader = quick_xml::Reader::from_reader(BufReader::new(file));

    let fail = |reader: &quick_xml::Reader<BufReader<std::fs::File>>, msg: String| {
        Error::input(format!(
            "{}: {msg} at byte {}",
            path.display(),
            reader.buffer_position()
        ))
    };

    let mut doc = PopulationDocument::default();
    let mut person: Option<Person> = None;
    let mut in_population = false;
    let mut attribute: Option<XmlAttribute> = None;
    let mut buf = Vec::new();
    loop {
        let event = match reader.read_event_into(&mut buf) {
            Ok(e) => e,
            Err(e) => return Err(fail(&reader, format!("parse error: {e}"))),
        };
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let empty = matches!(event, Event::Empty(_));
                let name = e.name();
                let tag = std::str::from_utf8(name.as_ref())
                    .map_err(|_| fail(&reader, "non-utf8 tag".into()))?
                    .to_owned();
                let get = |key: &str| -> Result<Option<String>> {
                    for attr in e.attributes() {
                        let attr =
                            attr.map_err(|e| fail(&reader, format!("bad attribute: {e}")))?;
                        if attr.key.as_ref() == key.as_bytes() {
                            let value = attr
                                .normalized_value(quick_xml::XmlVersion::Implicit1_0)
                                .map_err(|e| fail(&reader, format!("bad attribute value: {e}")))?;
                            return Ok(Some(value.into_owned()));
                        }
                    }
                    Ok(None)
                };
                match tag.as_str() {
                    "population" => in_population = true,
                    "person" => {
                        let id = get("id")?
                            .ok_or_else(|| fail(&reader, "person without id".into()))?;
                        person = Some(Person {
                            id: id.trim().to_owned(),
                            attributes: Vec::new(),
                            selected: true,
                            activities: Vec::new(),
                            leg_modes: Vec::new(),
                        });
                    }
                    "attributes" => {}
                    "attribute" => {
                        let name = get("name")?
                            .ok_or_else(|| fail(&reader, "attribute without name".into()))?;
                        let class = get("class")?.unwrap_or_else(|| "java.lang.String".into());
                        if !ALLOWED_CLASSES.contains(&class.as_str()) {
                            return Err(fail(&reader, format!("unknown attribute class `{class}`")));
                        }
                        let attr = XmlAttribute {
                            name,
                            class,
                            value: String::new(),
                        };
                        if empty {
                            if let Some(p) = person.as_mut() {
                                p.attributes.push(attr);
                            }
                        } else {
                            attribute = Some(attr);
                        }
                    }
                    "plan" => {
                        if let (Some(p), Some(sel)) = (person.as_mut(), get("selected")?) {
                            p.selected = sel == "yes";
                        }
                    }
                    "activity" => {
                        let p = person
                            .as_mut()
                            .ok_or_else(|| fail(&reader, "activity outside person".into()))?;
                        let activity_type = get("type")?
                            .ok_or_else(|| fail(&reader, "activity without type".into()))?;
                        let parse = |v: Option<String>, what: &str| -> Result<f64> {
                            v.ok_or_else(|| fail(&reader, format!("activity without {what}")))?
                                .parse()
                                .map_err(|_| fail(&reader, format!("bad activity {what}")))
                        };
                        let x = parse(get("x")?, "x")?;
                        let y = parse(get("y")?, "y")?;
                        let end_time_seconds = match get("end_time")? {
                            Some(t) => Some(parse_time(&t).ok_or_else(|| {
                                fail(&reader, format!("bad end_time `{t}`"))
                            })?),
                            None => None,
                        };
                        p.activities.push(PlanActivity {
                            activity_type,
                            x,
                            y,
                            end_time_seconds,
                        });
                    }
                    "leg" => {
                        if let Some(p) = person.as_mut() {
                            p.leg_modes.push(get("mode")?.unwrap_or_else(|| "car".into()));
                        }
                    }
                    _ => {}
                }
            }
            Event::Text(t) => {
                if let Some(attr) = attribute.as_mut() {
                    let text = t
                        .xml10_content()
                        .map_err(|e| fail(&reader, format!("bad text: {e}")))?;
                    attr.value.push_str(&text);
                }
            }
            Event::GeneralRef(r) => {
                if let Some(attr) = attribute.as_mut() {
                    if let Some(c) = r
                        .resolve_char_ref()
                        .map_err(|e| fail(&reader, format!("bad character reference: {e}")))?
                    {
                        attr.value.push(c);
                    } else {
                        let name = r
                            .decode()
                            .map_err(|e| fail(&reader, format!("bad entity: {e}")))?;
                        match name.as_ref() {
                            "amp" => attr.value.push('&'),
                            "lt" => attr.value.push('<'),
                            "gt" => attr.value.push('>'),
                            "quot" => attr.value.push('"'),
                            "apos" => attr.value.push('\''),
                            other => {
                                return Err(fail(&reader, format!("unknown entity `&{other};`")))
                            }
                        }
                    }
                }
            }
            Event::End(ref e) => match e.name().as_ref() {
                b"attribute" => {
                    if let (Some(p), Some(attr)) = (person.as_mut(), attribute.take()) {
                        p.attributes.push(attr);
                    }
                }
                b"person" => {
                    if let Some(mut p) = person.take() {
                        // a figure-style missing leg is padded with the default mode
                        while p.leg_modes.len() + 1 < p.activities.len() {
                            p.leg_modes.push("car".into());
                        }
                        if !p.activities.is_empty() && p.leg_modes.len() >= p.activities.len() {
                            return Err(fail(&reader, "more legs than gaps between activities".into()));
                        }
                        doc.persons.push(p);
                    }
                }
                _ => {}
            },
            Event::Eof => {
                if person.is_some() || !in_population {
                    return Err(fail(&reader, "truncated file".into()));
                }
                break;
            }
            _ => {}
        }
        buf.clear();
    }
    Ok(doc)
}
