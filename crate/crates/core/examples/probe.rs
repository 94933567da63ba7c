// Temporary tuning probe; removed before release.
use iaml_core::geometry::BBox;
use iaml_core::metrics::{click_accuracy, evaluate_records, EvalRecord};
use iaml_core::sampler::AugmentationConfig;
use iaml_core::toy::screens::{gen_screens, FEATURES_PER_ELEMENT};
use iaml_core::toy::train::{train, LossKind, TrainConfig};
use iaml_core::UIElement;

fn ceiling(screens: usize, epe: usize, noise: f64) {
    // Direct decode of the noisy cues: the information-theoretic-ish ceiling.
    let test = gen_screens(screens, epe, noise, 1 ^ 0x7465_7374_5f73_6574);
    let mut gt_records = Vec::new();
    let mut pred_records = Vec::new();
    let mut clicks = Vec::new();
    for s in &test {
        let preds: Vec<UIElement> = s
            .elements
            .iter()
            .enumerate()
            .map(|(j, gt)| {
                let c = &s.features[j * FEATURES_PER_ELEMENT + 3..j * FEATURES_PER_ELEMENT + 7];
                let (cx, cy, w, h) = (c[0], c[1], c[2].max(0.011), c[3].max(0.011));
                let b = BBox::new(
                    (cx - w / 2.0).clamp(0.0, 0.98),
                    (cy - h / 2.0).clamp(0.0, 0.98),
                    (cx + w / 2.0).clamp(0.012, 1.0),
                    (cy + h / 2.0).clamp(0.012, 1.0),
                );
                let b = b.unwrap_or_else(|_| BBox::new(0.4, 0.4, 0.6, 0.6).unwrap());
                clicks.push((b.center(), gt.bbox));
                UIElement::new(gt.element_type.clone(), b, "")
            })
            .collect();
        gt_records.push(EvalRecord { record_id: format!("{}", s.index), elements: s.elements.clone() });
        let mut gtr = gt_records.last().unwrap().clone();
        gtr.elements = preds;
        pred_records.push(gtr);
    }
    let rep = evaluate_records(&pred_records, &gt_records, &[0.1, 0.3, 0.5, 0.7], true);
    print!("CEILING click={:.3}", click_accuracy(&clicks));
    for t in &rep.thresholds {
        print!(" F1@{:.1}={:.3}", t.threshold, t.f1);
    }
    println!();
}

fn main() {
    let a: Vec<String> = std::env::args().collect();
    if a.get(1).map(|s| s == "ceiling").unwrap_or(false) {
        let noise: f64 = a.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.05);
        let epe: usize = a.get(3).and_then(|s| s.parse().ok()).unwrap_or(3);
        ceiling(500, epe, noise);
        return;
    }
    let screens: usize = a.get(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let k: u32 = a.get(2).and_then(|s| s.parse().ok()).unwrap_or(4);
    let lr: f64 = a.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let noise: f64 = a.get(4).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let loss: LossKind = LossKind::parse(a.get(5).map(|s| s.as_str()).unwrap_or("mle")).unwrap();
    let epe: usize = a.get(6).and_then(|s| s.parse().ok()).unwrap_or(3);
    let batch: usize = a.get(7).and_then(|s| s.parse().ok()).unwrap_or(32);
    let hidden: usize = a.get(8).and_then(|s| s.parse().ok()).unwrap_or(32);
    let fraction: f64 = a.get(9).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let seed: u64 = a.get(10).and_then(|s| s.parse().ok()).unwrap_or(1);
    let eps: f64 = a.get(11).and_then(|s| s.parse().ok()).unwrap_or(0.02);
    let cfg = TrainConfig {
        loss,
        aug: AugmentationConfig { epsilon: eps, n_trials: 1000, tau: 3.0, k_replicas: k, master_seed: 5 + seed },
        train_screens: screens,
        test_screens: 300,
        elements_per_screen: epe,
        feature_noise: noise,
        hidden,
        learning_rate: lr,
        batch_size: batch,
        data_fraction: fraction,
        data_seed: seed,
        init_seed: seed.wrapping_add(1000),
        ..TrainConfig::default()
    };
    let t0 = std::time::Instant::now();
    let out = train(&cfg).unwrap();
    print!(
        "{} k={k} lr={lr} b={batch} h={hidden} f={fraction} seed={seed} steps={} final={:.2} click={:.3}",
        loss.name(), out.report.steps, out.report.final_loss, out.report.click_accuracy
    );
    for t in &out.report.thresholds {
        print!(" F1@{:.1}={:.3}", t.threshold, t.f1);
    }
    println!(" [{:?}]", t0.elapsed());
}
