//! Parses message, activity and area files, georeferences users and applies
//! the penetration filter.

use tiescope::ingest::{
    filter_states_by_penetration, georeference_users, parse_activity, parse_messages, AreaTable, MessageFormat, MessageSchema,
};
use tiescope::synth::{generate_corpus, SynthConfig};

fn main() -> tiescope::Result<()> {
    let dir = std::env::temp_dir().join("tiescope-ingest");
    let synth = SynthConfig {
        unlocated_fraction: 0.15,
        ..Default::default()
    };
    let paths = generate_corpus(&synth)?.write_files(&dir)?;

    let schema = MessageSchema::with_dimensions(&["knowledge", "support"]);
    let corpus = parse_messages(&paths.messages, MessageFormat::from_path(&paths.messages), &schema)?;
    let r = &corpus.report;
    println!("messages: {} rows, {} accepted, {} rejected, {} self-loops", r.rows, r.accepted, r.rejected, r.self_loops);

    let activity = parse_activity(&paths.activity)?;
    let located = georeference_users(&activity, 3, 0.95)?;
    println!("georeferenced {} of {} users", located.len(), corpus.users.len());

    let areas = AreaTable::parse(&paths.areas)?;
    let filtered = filter_states_by_penetration(&areas, &located.area_counts(), 1.0, 100)?;
    let dropped: Vec<&str> = filtered.areas().iter().filter(|a| !a.included).map(|a| a.code.as_str()).collect();
    println!("{} of {} areas kept; dropped {:?}", filtered.included_count(), filtered.len(), dropped);
    Ok(())
}
