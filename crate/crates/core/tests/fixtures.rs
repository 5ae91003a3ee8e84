use std::path::Path;

use gxstpir::simnet::regenerate_fixtures;

#[test]
fn committed_fixtures_match_regeneration() {
    let committed = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let dir = tempfile::tempdir().unwrap();
    let written = regenerate_fixtures(dir.path()).unwrap();
    assert_eq!(written.len(), 7);
    for path in written {
        let name = path.file_name().unwrap();
        let fresh = std::fs::read_to_string(&path).unwrap();
        let old = std::fs::read_to_string(committed.join(name))
            .unwrap_or_else(|e| panic!("missing fixture {name:?}: {e}"));
        assert_eq!(fresh, old, "fixture {name:?} is stale; run `gxstpir fixtures regen`");
    }
}
