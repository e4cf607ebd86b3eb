//! Dictionary of the generated chart items and categorical vocabularies.

/// How a generated test responds to severity.
#[derive(Debug, Clone, Copy)]
pub struct TestSpec {
    pub itemid: i64,
    pub label: &'static str,
    pub abbreviation: &'static str,
    pub category: &'static str,
    pub unit: Option<&'static str>,
    /// Normal range; `None` for categorical items.
    pub bounds: Option<(f64, f64)>,
    /// Direction severity pushes the value (+1 up, -1 down).
    pub direction: f64,
    /// Severity sensitivity in half-widths of the normal range.
    pub sensitivity: f64,
    /// Observation noise in half-widths.
    pub noise: f64,
    /// Decimal places kept when charting.
    pub decimals: i32,
    /// Physical clamp applied after noise.
    pub clamp: (f64, f64),
    pub group: Schedule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    Vitals,
    Neuro,
    Labs,
    Ventilation,
}

impl Schedule {
    /// Probability the test is scheduled at a charting moment.
    pub fn probability(self) -> f64 {
        match self {
            Schedule::Vitals => 1.0,
            Schedule::Neuro => 0.5,
            Schedule::Labs => 0.25,
            Schedule::Ventilation => 0.3,
        }
    }
}

pub const VENTILATOR_MODE: &str = "Ventilator Mode";

/// Fifteen ventilation modes, ordered roughly by invasiveness.
pub const VENTILATOR_MODES: [&str; 15] = [
    "Standby",
    "Ambient",
    "CPAP",
    "CPAP/PSV",
    "CPAP/PPS",
    "SPONT",
    "PSV/SBT",
    "APRV",
    "SIMV",
    "SIMV/PSV",
    "SIMV/PRES",
    "PRVC/SIMV",
    "PRVC/AC",
    "CMV/ASSIST",
    "CMV/ASSIST/AutoFlow",
];

pub const TESTS: [TestSpec; 12] = [
    TestSpec {
        itemid: 220045,
        label: "Heart Rate",
        abbreviation: "HR",
        category: "Routine Vital Signs",
        unit: Some("bpm"),
        bounds: Some((60.0, 100.0)),
        direction: 1.0,
        sensitivity: 1.0,
        noise: 0.45,
        decimals: 0,
        clamp: (20.0, 250.0),
        group: Schedule::Vitals,
    },
    TestSpec {
        itemid: 220210,
        label: "Respiratory Rate",
        abbreviation: "RR",
        category: "Respiratory",
        unit: Some("insp/min"),
        bounds: Some((12.0, 20.0)),
        direction: 1.0,
        sensitivity: 1.0,
        noise: 0.5,
        decimals: 0,
        clamp: (2.0, 70.0),
        group: Schedule::Vitals,
    },
    TestSpec {
        itemid: 220181,
        label: "Non Invasive Blood Pressure mean",
        abbreviation: "NBPm",
        category: "Routine Vital Signs",
        unit: Some("mmHg"),
        bounds: Some((70.0, 100.0)),
        direction: 1.0,
        sensitivity: 0.9,
        noise: 0.5,
        decimals: 0,
        clamp: (20.0, 220.0),
        group: Schedule::Vitals,
    },
    TestSpec {
        itemid: 223762,
        label: "Temperature Celsius",
        abbreviation: "Temperature C",
        category: "Routine Vital Signs",
        unit: Some("°C"),
        bounds: Some((36.1, 37.2)),
        direction: 1.0,
        sensitivity: 0.8,
        noise: 0.5,
        decimals: 1,
        clamp: (30.0, 43.0),
        group: Schedule::Vitals,
    },
    TestSpec {
        itemid: 226253,
        label: "SpO2 Desat Limit",
        abbreviation: "SpO2 Desat Limit",
        category: "Alarms",
        unit: Some("%"),
        bounds: Some((85.0, 92.0)),
        direction: -1.0,
        sensitivity: 0.7,
        noise: 0.5,
        decimals: 0,
        clamp: (50.0, 100.0),
        group: Schedule::Vitals,
    },
    TestSpec {
        itemid: 223830,
        label: "PH (Arterial)",
        abbreviation: "PH (Arterial)",
        category: "Labs",
        unit: Some("units"),
        bounds: Some((7.35, 7.45)),
        direction: -1.0,
        sensitivity: 1.0,
        noise: 0.5,
        decimals: 2,
        clamp: (6.5, 8.0),
        group: Schedule::Labs,
    },
    TestSpec {
        itemid: 220645,
        label: "Sodium (serum)",
        abbreviation: "Sodium",
        category: "Labs",
        unit: Some("mEq/L"),
        bounds: Some((135.0, 145.0)),
        direction: -1.0,
        sensitivity: 0.9,
        noise: 0.5,
        decimals: 0,
        clamp: (100.0, 180.0),
        group: Schedule::Labs,
    },
    TestSpec {
        itemid: 227442,
        label: "Potassium (serum)",
        abbreviation: "Potassium",
        category: "Labs",
        unit: Some("mEq/L"),
        bounds: Some((3.5, 5.0)),
        direction: 1.0,
        sensitivity: 0.8,
        noise: 0.5,
        decimals: 1,
        clamp: (1.5, 9.0),
        group: Schedule::Labs,
    },
    TestSpec {
        itemid: 225624,
        label: "BUN",
        abbreviation: "BUN",
        category: "Labs",
        unit: Some("mg/dL"),
        bounds: Some((7.0, 20.0)),
        direction: 1.0,
        sensitivity: 1.0,
        noise: 0.5,
        decimals: 0,
        clamp: (1.0, 200.0),
        group: Schedule::Labs,
    },
    TestSpec {
        itemid: 223791,
        label: "Pain Level",
        abbreviation: "Pain Level",
        category: "Pain/Sedation",
        unit: None,
        bounds: Some((0.0, 3.0)),
        direction: 1.0,
        sensitivity: 1.0,
        noise: 0.6,
        decimals: 0,
        clamp: (0.0, 10.0),
        group: Schedule::Neuro,
    },
    TestSpec {
        itemid: 223849,
        label: VENTILATOR_MODE,
        abbreviation: VENTILATOR_MODE,
        category: "Respiratory",
        unit: None,
        bounds: None,
        direction: 1.0,
        sensitivity: 1.0,
        noise: 0.0,
        decimals: 0,
        clamp: (0.0, 14.0),
        group: Schedule::Ventilation,
    },
    TestSpec {
        itemid: 228096,
        label: "Goal Richmond-RAS Scale",
        abbreviation: "Goal Richmond-RAS Scale",
        category: "Pain/Sedation",
        unit: None,
        bounds: Some((-2.0, 0.0)),
        direction: -1.0,
        sensitivity: 1.0,
        noise: 0.6,
        decimals: 0,
        clamp: (-5.0, 4.0),
        group: Schedule::Neuro,
    },
];

/// Abbreviations of every generated test, in catalog order.
pub fn test_abbreviations() -> impl Iterator<Item = &'static str> {
    TESTS.iter().map(|t| t.abbreviation)
}

pub const ICD_I61: [&str; 9] = ["I610", "I611", "I612", "I613", "I614", "I615", "I616", "I618", "I619"];
pub const ICD_I63: [&str; 8] = ["I630", "I631", "I632", "I633", "I634", "I635", "I638", "I639"];
pub const ICD_G41: [&str; 5] = ["G410", "G411", "G412", "G418", "G419"];
pub const ICD_SECONDARY: [&str; 8] = ["I10", "E119", "E785", "N179", "J9601", "I4891", "E871", "F17210"];

pub const GENDERS: [(&str, f64); 2] = [("F", 0.48), ("M", 0.52)];
pub const INSURANCE: [(&str, f64); 4] = [("Medicare", 0.5), ("Medicaid", 0.15), ("Private", 0.2), ("Other", 0.15)];
pub const LANGUAGE: [(&str, f64); 3] = [("ENGLISH", 0.88), ("SPANISH", 0.05), ("?", 0.07)];
pub const MARITAL: [(&str, f64); 5] = [
    ("MARRIED", 0.45),
    ("SINGLE", 0.25),
    ("WIDOWED", 0.15),
    ("DIVORCED", 0.08),
    ("", 0.07),
];
pub const RACE: [(&str, f64); 6] = [
    ("WHITE", 0.62),
    ("BLACK/AFRICAN AMERICAN", 0.12),
    ("HISPANIC/LATINO", 0.06),
    ("ASIAN", 0.05),
    ("OTHER", 0.07),
    ("UNKNOWN", 0.08),
];
pub const CAREUNITS: [(&str, f64); 5] = [
    ("Neuro Intermediate", 0.2),
    ("Neuro Stepdown", 0.1),
    ("Neuro Surgical Intensive Care Unit (Neuro SICU)", 0.35),
    ("Medical Intensive Care Unit (MICU)", 0.2),
    ("Surgical Intensive Care Unit (SICU)", 0.15),
];
pub const YEAR_GROUPS: [&str; 5] = [
    "2008 - 2010",
    "2011 - 2013",
    "2014 - 2016",
    "2017 - 2019",
    "2020 - 2022",
];
