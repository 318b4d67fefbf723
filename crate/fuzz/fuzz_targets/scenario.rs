#![no_main]
use libfuzzer_sys::fuzz_target;
use ransac_cs::experiment::ExperimentScenario;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(scenario) = ExperimentScenario::parse(text) {
        let again = ExperimentScenario::parse(&scenario.to_key_values()).expect("serialized scenario must parse");
        assert_eq!(scenario, again);
        let _ = scenario.validate();
    }
});
