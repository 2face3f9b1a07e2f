#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "leakaudit/tabular.hpp"

// Extraction of a per-patient ICU length-of-stay cohort from MIMIC-III shaped
// CSV tables.

namespace leakaudit::etl {

using Id = std::optional<std::int64_t>;
// Seconds since 1970-01-01 (proleptic Gregorian, no time zone).
using Timestamp = std::optional<std::int64_t>;

struct AdmissionRow {
    Id subject_id, hadm_id;
    Timestamp admit_time, disch_time;
    std::string admission_type;
    std::string diagnosis;
    std::optional<int> expire_flag;
};

struct IcuStayRow {
    Id subject_id, hadm_id, icustay_id;
    Timestamp in_time, out_time;
    std::optional<double> los;  // days
};

struct DiagnosisRow {
    Id subject_id, hadm_id;
    std::string icd9_code;
};

struct PrescriptionRow {
    Id subject_id, hadm_id, icustay_id;
    std::string drug;
};

struct ChartEventRow {
    Id subject_id, hadm_id, icustay_id;
    std::string item_key;
    std::optional<double> value_num;
};

struct PatientRow {
    Id subject_id;
    Timestamp dob;
    std::string gender;
};

struct RawTables {
    std::vector<AdmissionRow> admissions;
    std::vector<IcuStayRow> icustays;
    std::vector<DiagnosisRow> diagnoses_icd;
    std::vector<PrescriptionRow> prescriptions;
    std::vector<ChartEventRow> chartevents;
    std::vector<PatientRow> patients;
};

// File name and logical-field -> CSV-header mapping for one table.
struct TableSchema {
    std::string file;
    std::map<std::string, std::string> columns;
};

// Keys: admissions, icustays, diagnoses_icd, prescriptions, chartevents, patients.
using Schema = std::map<std::string, TableSchema>;

// Canonical MIMIC-III file and column names. The admission-level expiry flag
// maps to HOSPITAL_EXPIRE_FLAG; chart item keys default to ITEMID.
Schema default_schema();

// Reads the six tables. Unparseable numeric or date cells become missing.
// Throws naming the table when a file is missing and naming table and column
// when a mapped column is absent from the header.
RawTables load_tables(const std::filesystem::path& dir, const Schema& schema = default_schema());

struct CohortConfig {
    std::string diagnosis_keyword = "cancer";
    std::vector<std::string> icd9_prefixes = {"162"};
    double los_threshold_days = 7.0;
    double age_cutoff_years = 60.0;
    std::vector<std::string> medication_keys;
    std::vector<std::string> lab_keys;

    void validate() const;
};

struct CohortRow {
    std::int64_t subject_id = 0;
    std::int64_t last_hadm_id = 0;
    std::int64_t last_icustay_id = 0;
    double los = 0.0;
    std::string gender;
    std::optional<int> age_years;
    std::string admission_type;
    // ICU stays of the subject's retained (non-expired) admissions; medication
    // and lab features are gathered over these.
    std::vector<std::int64_t> icustay_ids;
};

// Subject counts after each extraction rule, for the dataset sidecar.
struct Attrition {
    std::size_t admissions_total = 0;
    std::size_t admissions_after_expire_filter = 0;
    std::size_t subjects_after_expire_filter = 0;
    std::size_t subjects_with_keyword = 0;
    std::size_t subjects_with_icu_stay = 0;
    std::size_t subjects_with_icd9 = 0;
};

struct CohortTable {
    std::vector<CohortRow> rows;  // ascending subject_id
    Attrition attrition;
};

CohortTable extract_cohort(const RawTables& tables, const CohortConfig& cfg);

// 1 iff los > threshold. Throws on negative los.
int label_los(double los_days, double threshold_days);

// One row per cohort subject; columns are medication flags, gender, age
// category, admission-type one-hot, then per-lab means.
Dataset build_dataset(const CohortTable& cohort, const RawTables& tables, const CohortConfig& cfg);

// Lowercase with all whitespace removed.
std::string normalize_key(std::string_view s);

Timestamp parse_timestamp(std::string_view text);

}  // namespace leakaudit::etl
