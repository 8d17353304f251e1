use orchard_core::conditions::{gen_condition, Family, GenParams, SizeControl};
use orchard_core::harvest::*;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let c = gen_condition(Family::Willow, GenParams::new(5).with_control(SizeControl::FramedLinear)).unwrap();
    let sys = build_willow_typed(&c, WillowMode::ZeroZero, 4).unwrap();
    let total: usize = sys.iter().map(|(_, l)| l.len()).sum();
    println!("willow00 d4: build+selfcheck {:?}, total values {}", t0.elapsed(), total);
    let t0 = Instant::now();
    let v = check_willow00(&sys, &c).unwrap();
    println!("willow00 d4 check: {:?} -> {:?}", t0.elapsed(), v.map(|v| v.clause));

    let t0 = Instant::now();
    let c = gen_condition(Family::Willow, GenParams::new(7).with_control(SizeControl::FramedStrings)).unwrap();
    let sys = build_poplar(&c, 4).unwrap();
    let total: usize = sys.iter().map(|(_, l)| l.len()).sum();
    println!("poplar d4: build {:?}, total values {} ({} labels)", t0.elapsed(), total, sys.iter().count());
    let t0 = Instant::now();
    let v = check_poplar(&sys, Some(&c)).unwrap();
    println!("poplar d4 check: {:?} -> {:?}", t0.elapsed(), v.map(|v| v.clause));

    let t0 = Instant::now();
    let mc = gen_condition(Family::Miller, GenParams::new(3)).unwrap();
    let sys = build_mango(&mc, 4).unwrap();
    let t1 = Instant::now();
    let v = check_mango(&sys, Some(&mc)).unwrap();
    println!("mango d4: build {:?} check {:?} -> {:?}", t1 - t0, t1.elapsed(), v.map(|v| v.clause));

    let t0 = Instant::now();
    let sys = build_cherry(&mc, 4).unwrap();
    let t1 = Instant::now();
    let v = check_cherry(&sys, Some(&mc)).unwrap();
    println!("cherry d4: build {:?} check {:?} -> {:?}", t1 - t0, t1.elapsed(), v.map(|v| v.clause));

    let t0 = Instant::now();
    let c2 = gen_condition(Family::Willow, GenParams::new(9).with_control(SizeControl::FramedLinear)).unwrap();
    let sys = build_willow_typed(&c2, WillowMode::ZeroTwo, 4).unwrap();
    let t1 = Instant::now();
    let v = check_willow02(&sys, Some(&c2)).unwrap();
    println!("willow02 d4: build {:?} check {:?} -> {:?}", t1 - t0, t1.elapsed(), v.map(|v| v.clause));
}
