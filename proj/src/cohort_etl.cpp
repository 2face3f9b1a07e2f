#include "leakaudit/cohort_etl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "leakaudit/csv.hpp"

namespace leakaudit::etl {

namespace {

// Howard Hinnant's civil-date algorithms.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct Civil {
    std::int64_t y;
    unsigned m, d;
};

Civil civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {y + (m <= 2), m, d};
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    return a / b - ((a % b != 0) && ((a < 0) != (b < 0)));
}

// Whole years elapsed between two timestamps.
int years_between(std::int64_t from, std::int64_t to) {
    const std::int64_t fd = floor_div(from, 86400), td = floor_div(to, 86400);
    const Civil a = civil_from_days(fd), b = civil_from_days(td);
    std::int64_t years = b.y - a.y;
    const std::int64_t a_sec = from - fd * 86400, b_sec = to - td * 86400;
    if (std::tie(b.m, b.d, b_sec) < std::tie(a.m, a.d, a_sec)) --years;
    return static_cast<int>(years);
}

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

Id parse_id(std::string_view cell) {
    const std::string t = trim(cell);
    if (t.empty()) return std::nullopt;
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec == std::errc{} && ptr == t.data() + t.size()) return v;
    // ids exported as "123.0"
    if (auto d = csv::to_double(t); d && std::floor(*d) == *d) return static_cast<std::int64_t>(*d);
    return std::nullopt;
}

// Resolves logical field names to column indices for one table.
class Binder {
public:
    Binder(const csv::Table& t, const std::string& table_label, const TableSchema& schema)
        : table_(t), label_(table_label), schema_(schema) {}

    std::size_t column(const std::string& field) const {
        const auto it = schema_.columns.find(field);
        const std::string name = it == schema_.columns.end() ? field : it->second;
        const auto idx = table_.find(name);
        if (!idx) throw std::runtime_error(label_ + ": column " + name + " not found");
        return *idx;
    }

private:
    const csv::Table& table_;
    const std::string& label_;
    const TableSchema& schema_;
};

std::string table_label(const TableSchema& s, const std::string& key) {
    std::filesystem::path p(s.file);
    return p.stem().string().empty() ? key : p.stem().string();
}

csv::Table read_table(const std::filesystem::path& dir, const Schema& schema,
                      const std::string& key, std::string& label, const TableSchema*& ts) {
    const auto it = schema.find(key);
    if (it == schema.end()) throw std::runtime_error("schema has no entry for table " + key);
    ts = &it->second;
    label = table_label(it->second, key);
    const auto path = dir / it->second.file;
    if (!std::filesystem::exists(path)) {
        throw std::runtime_error(label + ": file " + path.string() + " not found");
    }
    return csv::read_file(path);
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
    return lower(haystack).find(lower(needle)) != std::string::npos;
}

std::string normalize_icd9(std::string_view code) {
    std::string out;
    for (char c : code) {
        if (c != '.' && !std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
    }
    return out;
}

std::string format_number(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string column_suffix(std::string_view s) {
    std::string out;
    for (char c : lower(trim(s))) {
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    }
    return out.empty() ? "unknown" : out;
}

}  // namespace

Schema default_schema() {
    Schema s;
    s["admissions"] = {"ADMISSIONS.csv",
                       {{"subject_id", "SUBJECT_ID"},
                        {"hadm_id", "HADM_ID"},
                        {"admit_time", "ADMITTIME"},
                        {"disch_time", "DISCHTIME"},
                        {"admission_type", "ADMISSION_TYPE"},
                        {"diagnosis", "DIAGNOSIS"},
                        {"expire_flag", "HOSPITAL_EXPIRE_FLAG"}}};
    s["icustays"] = {"ICUSTAYS.csv",
                     {{"subject_id", "SUBJECT_ID"},
                      {"hadm_id", "HADM_ID"},
                      {"icustay_id", "ICUSTAY_ID"},
                      {"in_time", "INTIME"},
                      {"out_time", "OUTTIME"},
                      {"los", "LOS"}}};
    s["diagnoses_icd"] = {"DIAGNOSES_ICD.csv",
                          {{"subject_id", "SUBJECT_ID"},
                           {"hadm_id", "HADM_ID"},
                           {"icd9_code", "ICD9_CODE"}}};
    s["prescriptions"] = {"PRESCRIPTIONS.csv",
                          {{"subject_id", "SUBJECT_ID"},
                           {"hadm_id", "HADM_ID"},
                           {"icustay_id", "ICUSTAY_ID"},
                           {"drug", "DRUG"}}};
    s["chartevents"] = {"CHARTEVENTS.csv",
                        {{"subject_id", "SUBJECT_ID"},
                         {"hadm_id", "HADM_ID"},
                         {"icustay_id", "ICUSTAY_ID"},
                         {"item_key", "ITEMID"},
                         {"value_num", "VALUENUM"}}};
    s["patients"] = {"PATIENTS.csv",
                     {{"subject_id", "SUBJECT_ID"}, {"dob", "DOB"}, {"gender", "GENDER"}}};
    return s;
}

Timestamp parse_timestamp(std::string_view text) {
    const std::string t = trim(text);
    int y = 0;
    unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0;
    auto num = [&](std::size_t pos, std::size_t len, auto& out) {
        if (pos + len > t.size()) return false;
        auto [ptr, ec] = std::from_chars(t.data() + pos, t.data() + pos + len, out);
        return ec == std::errc{} && ptr == t.data() + pos + len;
    };
    if (t.size() < 10 || t[4] != '-' || t[7] != '-') return std::nullopt;
    if (!num(0, 4, y) || !num(5, 2, mo) || !num(8, 2, d)) return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
    if (t.size() > 10) {
        if ((t[10] != ' ' && t[10] != 'T') || t.size() < 16 || t[13] != ':') return std::nullopt;
        if (!num(11, 2, h) || !num(14, 2, mi)) return std::nullopt;
        if (t.size() >= 19) {
            if (t[16] != ':' || !num(17, 2, s)) return std::nullopt;
        }
        if (h > 23 || mi > 59 || s > 60) return std::nullopt;
    }
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

RawTables load_tables(const std::filesystem::path& dir, const Schema& schema) {
    RawTables out;
    std::string label;
    const TableSchema* ts = nullptr;

    {
        const auto t = read_table(dir, schema, "admissions", label, ts);
        const Binder b(t, label, *ts);
        const auto c_sub = b.column("subject_id"), c_hadm = b.column("hadm_id"),
                   c_admit = b.column("admit_time"), c_disch = b.column("disch_time"),
                   c_type = b.column("admission_type"), c_diag = b.column("diagnosis"),
                   c_exp = b.column("expire_flag");
        for (const auto& r : t.rows) {
            AdmissionRow a;
            a.subject_id = parse_id(r[c_sub]);
            a.hadm_id = parse_id(r[c_hadm]);
            a.admit_time = parse_timestamp(r[c_admit]);
            a.disch_time = parse_timestamp(r[c_disch]);
            a.admission_type = trim(r[c_type]);
            a.diagnosis = r[c_diag];
            if (auto f = csv::to_double(r[c_exp]); f && (*f == 0.0 || *f == 1.0)) {
                a.expire_flag = static_cast<int>(*f);
            }
            out.admissions.push_back(std::move(a));
        }
    }
    {
        const auto t = read_table(dir, schema, "icustays", label, ts);
        const Binder b(t, label, *ts);
        const auto c_sub = b.column("subject_id"), c_hadm = b.column("hadm_id"),
                   c_icu = b.column("icustay_id"), c_in = b.column("in_time"),
                   c_out = b.column("out_time"), c_los = b.column("los");
        for (const auto& r : t.rows) {
            IcuStayRow s;
            s.subject_id = parse_id(r[c_sub]);
            s.hadm_id = parse_id(r[c_hadm]);
            s.icustay_id = parse_id(r[c_icu]);
            s.in_time = parse_timestamp(r[c_in]);
            s.out_time = parse_timestamp(r[c_out]);
            s.los = csv::to_double(r[c_los]);
            if (s.los && *s.los < 0.0) s.los.reset();
            out.icustays.push_back(std::move(s));
        }
    }
    {
        const auto t = read_table(dir, schema, "diagnoses_icd", label, ts);
        const Binder b(t, label, *ts);
        const auto c_sub = b.column("subject_id"), c_hadm = b.column("hadm_id"),
                   c_code = b.column("icd9_code");
        for (const auto& r : t.rows) {
            out.diagnoses_icd.push_back({parse_id(r[c_sub]), parse_id(r[c_hadm]), trim(r[c_code])});
        }
    }
    {
        const auto t = read_table(dir, schema, "prescriptions", label, ts);
        const Binder b(t, label, *ts);
        const auto c_sub = b.column("subject_id"), c_hadm = b.column("hadm_id"),
                   c_icu = b.column("icustay_id"), c_drug = b.column("drug");
        for (const auto& r : t.rows) {
            out.prescriptions.push_back(
                {parse_id(r[c_sub]), parse_id(r[c_hadm]), parse_id(r[c_icu]), r[c_drug]});
        }
    }
    {
        const auto t = read_table(dir, schema, "chartevents", label, ts);
        const Binder b(t, label, *ts);
        const auto c_sub = b.column("subject_id"), c_hadm = b.column("hadm_id"),
                   c_icu = b.column("icustay_id"), c_item = b.column("item_key"),
                   c_val = b.column("value_num");
        for (const auto& r : t.rows) {
            out.chartevents.push_back({parse_id(r[c_sub]), parse_id(r[c_hadm]),
                                       parse_id(r[c_icu]), r[c_item], csv::to_double(r[c_val])});
        }
    }
    {
        const auto t = read_table(dir, schema, "patients", label, ts);
        const Binder b(t, label, *ts);
        const auto c_sub = b.column("subject_id"), c_dob = b.column("dob"),
                   c_gender = b.column("gender");
        for (const auto& r : t.rows) {
            out.patients.push_back(
                {parse_id(r[c_sub]), parse_timestamp(r[c_dob]), trim(r[c_gender])});
        }
    }
    return out;
}

void CohortConfig::validate() const {
    if (!(los_threshold_days > 0.0)) {
        throw std::invalid_argument("cohort: los_threshold_days must be > 0");
    }
    if (icd9_prefixes.empty()) throw std::invalid_argument("cohort: icd9_prefixes is empty");
    for (const auto& p : icd9_prefixes) {
        if (normalize_icd9(p).empty()) throw std::invalid_argument("cohort: empty icd9 prefix");
    }
}

CohortTable extract_cohort(const RawTables& tables, const CohortConfig& cfg) {
    cfg.validate();
    CohortTable out;
    auto& att = out.attrition;
    att.admissions_total = tables.admissions.size();

    // Rule 1: drop admissions flagged as expired.
    std::map<std::int64_t, std::vector<const AdmissionRow*>> by_subject;
    for (const auto& a : tables.admissions) {
        if (a.expire_flag && *a.expire_flag == 1) continue;
        ++att.admissions_after_expire_filter;
        if (a.subject_id) by_subject[*a.subject_id].push_back(&a);
    }
    att.subjects_after_expire_filter = by_subject.size();

    std::unordered_map<std::int64_t, std::vector<const IcuStayRow*>> stays_by_hadm;
    for (const auto& s : tables.icustays) {
        if (s.hadm_id && s.icustay_id) stays_by_hadm[*s.hadm_id].push_back(&s);
    }

    std::unordered_set<std::int64_t> icd9_subjects;
    for (const auto& d : tables.diagnoses_icd) {
        if (!d.subject_id) continue;
        const std::string code = normalize_icd9(d.icd9_code);
        for (const auto& p : cfg.icd9_prefixes) {
            if (code.starts_with(normalize_icd9(p))) {
                icd9_subjects.insert(*d.subject_id);
                break;
            }
        }
    }

    std::unordered_map<std::int64_t, const PatientRow*> patients;
    for (const auto& p : tables.patients) {
        if (p.subject_id) patients.emplace(*p.subject_id, &p);
    }

    for (const auto& [subject, admissions] : by_subject) {
        // Rule 2a: some retained admission mentions the keyword.
        const bool keyword = std::any_of(admissions.begin(), admissions.end(), [&](auto* a) {
            return contains_ci(a->diagnosis, cfg.diagnosis_keyword);
        });
        if (!keyword) continue;
        ++att.subjects_with_keyword;

        // Rule 2b: needs an admission with an ICU stay that has a LOS.
        const AdmissionRow* latest = nullptr;
        std::vector<std::int64_t> icustay_ids;
        for (const AdmissionRow* a : admissions) {
            if (!a->hadm_id) continue;
            const auto it = stays_by_hadm.find(*a->hadm_id);
            if (it == stays_by_hadm.end()) continue;
            bool usable = false;
            for (const IcuStayRow* s : it->second) {
                if (s->subject_id && *s->subject_id != subject) continue;
                icustay_ids.push_back(*s->icustay_id);
                usable = usable || s->los.has_value();
            }
            if (!usable) continue;
            if (!latest || std::tie(a->admit_time, *a->hadm_id) >
                               std::tie(latest->admit_time, *latest->hadm_id)) {
                latest = a;
            }
        }
        if (!latest) continue;
        ++att.subjects_with_icu_stay;

        // Rule 3: ICD-9 family.
        if (!icd9_subjects.contains(subject)) continue;
        ++att.subjects_with_icd9;

        const IcuStayRow* stay = nullptr;
        for (const IcuStayRow* s : stays_by_hadm.at(*latest->hadm_id)) {
            if (!s->los || (s->subject_id && *s->subject_id != subject)) continue;
            if (!stay || std::tie(s->in_time, *s->icustay_id) >
                             std::tie(stay->in_time, *stay->icustay_id)) {
                stay = s;
            }
        }

        CohortRow row;
        row.subject_id = subject;
        row.last_hadm_id = *latest->hadm_id;
        row.last_icustay_id = *stay->icustay_id;
        row.los = *stay->los;
        row.admission_type = latest->admission_type;
        std::sort(icustay_ids.begin(), icustay_ids.end());
        icustay_ids.erase(std::unique(icustay_ids.begin(), icustay_ids.end()), icustay_ids.end());
        row.icustay_ids = std::move(icustay_ids);
        if (const auto p = patients.find(subject); p != patients.end()) {
            row.gender = p->second->gender;
            if (p->second->dob && latest->admit_time) {
                row.age_years = years_between(*p->second->dob, *latest->admit_time);
            }
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

int label_los(double los_days, double threshold_days) {
    if (!(los_days >= 0.0)) {
        throw std::invalid_argument("label_los: los must be >= 0, got " + format_number(los_days));
    }
    return los_days > threshold_days ? 1 : 0;
}

std::string normalize_key(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    return out;
}

Dataset build_dataset(const CohortTable& cohort, const RawTables& tables, const CohortConfig& cfg) {
    cfg.validate();
    if (cohort.rows.empty()) throw std::invalid_argument("build_dataset: cohort is empty");

    std::vector<std::string> meds, labs;
    std::set<std::string> seen;
    auto add_keys = [&](const std::vector<std::string>& keys, std::vector<std::string>& dst,
                        const char* what) {
        for (const auto& k : keys) {
            std::string n = normalize_key(k);
            if (n.empty()) throw std::invalid_argument(std::string("build_dataset: empty ") + what + " key");
            if (!seen.insert(n).second) {
                throw std::invalid_argument("build_dataset: duplicate feature key '" + n + "'");
            }
            dst.push_back(std::move(n));
        }
    };
    add_keys(cfg.medication_keys, meds, "medication");
    add_keys(cfg.lab_keys, labs, "lab");

    std::vector<std::string> admission_types;
    for (const auto& r : cohort.rows) admission_types.push_back(r.admission_type);
    std::sort(admission_types.begin(), admission_types.end());
    admission_types.erase(std::unique(admission_types.begin(), admission_types.end()),
                          admission_types.end());

    std::vector<Column> columns;
    for (const auto& m : meds) columns.push_back({"med_" + m, ColumnKind::Binary});
    columns.push_back({"gender_male", ColumnKind::Binary});
    columns.push_back({"age_gt_" + format_number(cfg.age_cutoff_years), ColumnKind::Binary});
    for (const auto& t : admission_types) {
        columns.push_back({"admission_type_" + column_suffix(t), ColumnKind::Binary});
    }
    for (const auto& l : labs) columns.push_back({"lab_" + l, ColumnKind::Numeric});

    // Index prescriptions and chart events by ICU stay.
    std::unordered_map<std::int64_t, std::vector<std::string>> drugs_by_stay;
    for (const auto& p : tables.prescriptions) {
        if (p.icustay_id) drugs_by_stay[*p.icustay_id].push_back(normalize_key(p.drug));
    }
    std::unordered_map<std::int64_t, std::vector<const ChartEventRow*>> events_by_stay;
    for (const auto& e : tables.chartevents) {
        if (e.icustay_id && e.value_num) events_by_stay[*e.icustay_id].push_back(&e);
    }

    Dataset ds(columns);
    std::vector<double> values(columns.size());
    for (const auto& r : cohort.rows) {
        std::size_t c = 0;
        for (const auto& m : meds) {
            bool given = false;
            for (auto stay : r.icustay_ids) {
                const auto it = drugs_by_stay.find(stay);
                if (it == drugs_by_stay.end()) continue;
                given = std::any_of(it->second.begin(), it->second.end(),
                                    [&](const std::string& d) { return d.find(m) != std::string::npos; });
                if (given) break;
            }
            values[c++] = given ? 1.0 : 0.0;
        }
        if (r.gender.empty()) {
            values[c++] = kMissing;
        } else {
            values[c++] = (std::toupper(static_cast<unsigned char>(r.gender[0])) == 'M') ? 1.0 : 0.0;
        }
        values[c++] = r.age_years ? (*r.age_years > cfg.age_cutoff_years ? 1.0 : 0.0) : kMissing;
        for (const auto& t : admission_types) values[c++] = (r.admission_type == t) ? 1.0 : 0.0;
        for (const auto& l : labs) {
            double sum = 0.0;
            std::size_t n = 0;
            for (auto stay : r.icustay_ids) {
                const auto it = events_by_stay.find(stay);
                if (it == events_by_stay.end()) continue;
                for (const ChartEventRow* e : it->second) {
                    if (e->subject_id && *e->subject_id != r.subject_id) continue;
                    if (normalize_key(e->item_key).find(l) == std::string::npos) continue;
                    sum += *e->value_num;
                    ++n;
                }
            }
            values[c++] = n ? sum / static_cast<double>(n) : kMissing;
        }
        ds.add_row(values, label_los(r.los, cfg.los_threshold_days));
    }

    auto& meta = ds.meta();
    const auto& a = cohort.attrition;
    meta["source"] = "etl";
    meta["admissions_total"] = std::to_string(a.admissions_total);
    meta["admissions_after_expire_filter"] = std::to_string(a.admissions_after_expire_filter);
    meta["subjects_after_expire_filter"] = std::to_string(a.subjects_after_expire_filter);
    meta["subjects_with_keyword"] = std::to_string(a.subjects_with_keyword);
    meta["subjects_with_icu_stay"] = std::to_string(a.subjects_with_icu_stay);
    meta["subjects_with_icd9"] = std::to_string(a.subjects_with_icd9);
    meta["los_threshold_days"] = format_number(cfg.los_threshold_days);
    return ds;
}

}  // namespace leakaudit::etl
