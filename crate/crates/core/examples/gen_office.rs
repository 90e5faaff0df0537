//! Regenerate the shipped office scenarios under `scenarios/`.

use std::fs;
use std::path::Path;

use occusim::scenario::{doc_to_json, office::office_document};

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    fs::create_dir_all(&dir)?;
    for (rain, file) in [(true, "office_rain.json"), (false, "office_no_rain.json")] {
        let path = dir.join(file);
        fs::write(&path, doc_to_json(&office_document(rain)))?;
        println!("{}", path.display());
    }
    Ok(())
}
