use keysel::pipeline::{id_color, render_overlay, BACKGROUND};
use keysel::{FrameSize, InstanceId, LabelMap, RleMask, SaliencyMap, SequenceInput, SequenceResult};

const W: u32 = 9;
const H: u32 = 7;

fn input() -> SequenceInput<f64> {
    SequenceInput {
        frame_size: FrameSize::new(W, H),
        descriptor_dim: 1,
        candidates: vec![Vec::new(); 2],
        saliency: vec![SaliencyMap::uniform(W, H, 0.0).unwrap(); 2],
        ground_truth: None,
    }
}

fn result() -> SequenceResult<f64> {
    let size = FrameSize::new(W, H);
    let mut one = LabelMap::new(size);
    one.insert(InstanceId(4), RleMask::rectangle(W, H, 2, 1, 3, 4)).unwrap();
    SequenceResult { frame_size: size, labels: vec![LabelMap::new(size), one], provenance: Vec::new() }
}

fn render(frame: usize) -> Vec<u8> {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.ppm");
    render_overlay(&input(), &result(), frame, &path).unwrap();
    std::fs::read(path).unwrap()
}

fn pixels(bytes: &[u8]) -> Vec<[u8; 3]> {
    let header = format!("P6\n{W} {H}\n255\n");
    assert!(bytes.starts_with(header.as_bytes()));
    let body = &bytes[header.len()..];
    assert_eq!(body.len(), (W * H * 3) as usize);
    body.chunks(3).map(|c| [c[0], c[1], c[2]]).collect()
}

#[test]
fn empty_map_is_uniform_background() {
    assert!(pixels(&render(0)).iter().all(|&p| p == BACKGROUND));
}

#[test]
fn one_instance_colours_exactly_its_pixels() {
    let px = pixels(&render(1));
    let colour = id_color(InstanceId(4));
    assert_eq!(px.iter().filter(|&&p| p == colour).count(), 12);
    assert_eq!(px.iter().filter(|&&p| p == BACKGROUND).count(), (W * H) as usize - 12);
    assert_eq!(px[(W + 2) as usize], colour);
}

#[test]
fn rendering_is_byte_identical() {
    assert_eq!(render(1), render(1));
}

#[test]
fn bad_frame_or_size_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.ppm");
    assert!(render_overlay(&input(), &result(), 2, &path).is_err());
    let mut other = input();
    other.frame_size = FrameSize::new(W + 1, H);
    assert!(render_overlay(&other, &result(), 0, &path).is_err());
}
