//! File formats: location/refuge CSV ingestion and population XML.

mod population;
mod tables;

pub use population::{
    population_xml_to_string, read_population_xml, write_population_xml, Person, PlanActivity,
    PopulationDocument, XmlAttribute,
};
pub use tables::{read_locations, read_refuges};
