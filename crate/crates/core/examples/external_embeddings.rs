//! Plugs precomputed per-view features (for example from a CNN) into the
//! learner through the text and binary record formats.
//!
//!     cargo run --example external_embeddings

use std::collections::HashMap;

use orthonet::embedding::{encode_embeddings_binary, format_record, parse_embeddings_binary, parse_embeddings_text, ExternalEmbedder};
use orthonet::{CategoryStore, Distance, Pooling};

fn main() -> orthonet::Result<()> {
    let mut text = String::new();
    for (obj, base) in [("cup/1", [0.9, 0.1, 0.0]), ("cup/2", [0.8, 0.2, 0.0]), ("can/1", [0.1, 0.1, 0.8])] {
        for (k, view) in ["front", "top", "side"].into_iter().enumerate() {
            let v: Vec<f64> = base.iter().map(|x| x + 0.01 * k as f64).collect();
            text.push_str(&format_record(&format!("{obj}/{view}"), &v));
            text.push('\n');
        }
    }
    print!("{text}");

    let features = parse_embeddings_text(&text)?;
    // the binary layout carries float32 values
    let bytes = encode_embeddings_binary(features.iter().map(|(k, v)| (k.as_str(), v)));
    let from_bin: HashMap<_, _> = parse_embeddings_binary(&bytes)?;
    println!("{} records, {} bytes in binary form", from_bin.len(), bytes.len());

    let emb = ExternalEmbedder::new("demo-cnn", features)?;
    let cup = emb.descriptor("cup/1", Pooling::Max)?;
    // the store is tied to the embedder id, dimension and pooling
    let mut store = CategoryStore::for_descriptor(&cup, Distance::Js);
    store.teach("cup", &cup)?;
    store.teach("can", &emb.descriptor("can/1", Pooling::Max)?)?;

    let c = store.classify(&emb.descriptor("cup/2", Pooling::Max)?)?;
    println!("cup/2 -> {:?} (ocd {:.4})", c.predicted, c.distance);
    for (label, ocd) in &c.table {
        println!("  {label}: {ocd:.4}");
    }
    Ok(())
}
