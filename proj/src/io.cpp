/**
 * \file io.cpp
 *
 * \brief Parsers and writers for the on-disk formats.
 *
 * <hr/>
 *
 * Copyright 2026 the derres authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "derres/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace derres {

namespace {

using nlohmann::json;

json parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open \"" + path.string() + "\"");
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

double get_number(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw ParseError(where + ": missing or non-numeric field \"" + key + "\"");
    }
    return j.at(key).get<double>();
}

std::string get_string(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_string()) {
        throw ParseError(where + ": missing or non-string field \"" + key + "\"");
    }
    return j.at(key).get<std::string>();
}

std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) {
        ++begin;
    }
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) {
        --end;
    }
    return s.substr(begin, end - begin);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        fields.push_back(trim(line.substr(pos, comma - pos)));
        if (comma == std::string::npos) {
            break;
        }
        pos = comma + 1;
    }
    return fields;
}

}  // namespace

LoadedFleet load_fleet(const std::filesystem::path& path) {
    const json j = parse_file(path);
    const std::string where = path.string();
    if (!j.is_object()) {
        throw ParseError(where + ": fleet file must be a JSON object");
    }

    LoadedFleet fleet;
    if (j.contains("alpha_c")) {
        fleet.alpha_c = get_number(j, "alpha_c", where);
    }
    if (j.contains("p_r_kw")) {
        fleet.p_r_kw = get_number(j, "p_r_kw", where);
    }
    if (!j.contains("ders") || !j.at("ders").is_array()) {
        throw ParseError(where + ": missing \"ders\" array");
    }
    for (const json& entry : j.at("ders")) {
        const std::string der_where = where + ": ders[" + std::to_string(fleet.ders.size()) + "]";
        if (!entry.is_object()) {
            throw ParseError(der_where + ": must be an object");
        }
        DerParams der;
        if (!entry.contains("id") || !entry.at("id").is_number_integer()) {
            throw ParseError(der_where + ": missing or non-integer field \"id\"");
        }
        der.id = entry.at("id").get<int>();
        der.node = get_string(entry, "node", der_where);
        der.p_c_kw = get_number(entry, "p_c_kw", der_where);
        der.p_e_kw = get_number(entry, "p_e_kw", der_where);
        der.rbp = get_number(entry, "rbp", der_where);
        if (entry.contains("pi")) {
            der.pi = get_number(entry, "pi", der_where);
        }
        fleet.ders.push_back(std::move(der));
    }
    return fleet;
}

CoalitionTable load_coalition_table(const std::filesystem::path& path) {
    const json j = parse_file(path);
    const std::string where = path.string();
    if (!j.is_object() || !j.contains("n") || !j.at("n").is_number_integer()) {
        throw ParseError(where + ": missing integer field \"n\"");
    }
    const int n = j.at("n").get<int>();
    if (n < 1 || n > max_players) {
        throw ValidationError(where + ": player count " + std::to_string(n) + " outside [1, " +
                              std::to_string(max_players) + "]");
    }
    if (!j.contains("values") || !j.at("values").is_object()) {
        throw ParseError(where + ": missing \"values\" object");
    }

    CoalitionTable table = CoalitionTable::zeros(n);
    std::vector<bool> present(table.coalition_count(), false);
    present[0] = true;  // V(empty) is implicit
    for (const auto& [key, value] : j.at("values").items()) {
        const CoalitionMask mask = parse_coalition_key(key, n);
        if (present[mask]) {
            throw ValidationError(where + ": duplicate coalition \"" + key + "\"");
        }
        if (!value.is_number()) {
            throw ParseError(where + ": non-numeric value for coalition \"" + key + "\"");
        }
        present[mask] = true;
        table.values[mask] = value.get<double>();
    }
    for (std::size_t mask = 1; mask < present.size(); ++mask) {
        if (!present[mask]) {
            throw ValidationError(where + ": missing coalition \"" +
                                  coalition_key(static_cast<CoalitionMask>(mask)) + "\"");
        }
    }
    table.validate();
    return table;
}

std::string coalition_table_json(const CoalitionTable& table) {
    table.validate();
    json values = json::object();
    for (std::size_t mask = 1; mask < table.coalition_count(); ++mask) {
        values[coalition_key(static_cast<CoalitionMask>(mask))] = table.values[mask];
    }
    json j;
    j["n"] = table.n;
    j["values"] = std::move(values);
    return j.dump(2) + "\n";
}

void save_coalition_table(const CoalitionTable& table, const std::filesystem::path& path) {
    atomic_write(path, coalition_table_json(table));
}

NetworkModel load_network(const std::filesystem::path& path) {
    const json j = parse_file(path);
    const std::string where = path.string();
    if (!j.is_object()) {
        throw ParseError(where + ": network file must be a JSON object");
    }

    NetworkModel network;
    network.v_base = get_number(j, "v_base_v", where);
    if (!j.contains("slack") || !j.at("slack").is_object()) {
        throw ParseError(where + ": missing \"slack\" object");
    }
    network.slack_bus = get_string(j.at("slack"), "bus", where + ": slack");
    network.slack_v = get_number(j.at("slack"), "v_v", where + ": slack");

    if (!j.contains("buses") || !j.at("buses").is_array()) {
        throw ParseError(where + ": missing \"buses\" array");
    }
    for (const json& entry : j.at("buses")) {
        const std::string bus_where = where + ": buses[" + std::to_string(network.buses.size()) + "]";
        Bus bus;
        bus.id = get_string(entry, "id", bus_where);
        if (entry.contains("load_p_kw")) {
            bus.load_p_kw = get_number(entry, "load_p_kw", bus_where);
        }
        if (entry.contains("load_q_kvar")) {
            bus.load_q_kvar = get_number(entry, "load_q_kvar", bus_where);
        }
        network.buses.push_back(std::move(bus));
    }

    if (!j.contains("branches") || !j.at("branches").is_array()) {
        throw ParseError(where + ": missing \"branches\" array");
    }
    for (const json& entry : j.at("branches")) {
        const std::string br_where =
            where + ": branches[" + std::to_string(network.branches.size()) + "]";
        Branch branch;
        branch.from = get_string(entry, "from", br_where);
        branch.to = get_string(entry, "to", br_where);
        branch.r_ohm = get_number(entry, "r_ohm", br_where);
        branch.x_ohm = get_number(entry, "x_ohm", br_where);
        network.branches.push_back(std::move(branch));
    }

    if (j.contains("der_sites")) {
        if (!j.at("der_sites").is_object()) {
            throw ParseError(where + ": \"der_sites\" must be an object");
        }
        for (const auto& [key, value] : j.at("der_sites").items()) {
            int der_id = 0;
            std::size_t used = 0;
            try {
                der_id = std::stoi(key, &used);
            } catch (const std::exception&) {
                throw ParseError(where + ": der_sites key \"" + key + "\" is not a DER id");
            }
            if (used != key.size()) {
                throw ParseError(where + ": der_sites key \"" + key + "\" is not a DER id");
            }
            if (!value.is_string()) {
                throw ParseError(where + ": der_sites[" + key + "] must be a bus id string");
            }
            network.der_sites[der_id] = value.get<std::string>();
        }
    }
    validate_network(network);
    return network;
}

std::vector<HistoryRecord> load_history_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open \"" + path.string() + "\"");
    }
    const std::string where = path.string();

    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(where + ": empty history file");
    }
    const std::vector<std::string> header = split_csv_line(line);
    auto column = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw ParseError(where + ": header lacks required column \"" + name + "\"");
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t id_col = column("der_id");
    const std::size_t committed_col = column("committed_kw");
    const std::size_t supplied_col = column("supplied_kw");

    std::vector<HistoryRecord> records;
    for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
        if (trim(line).empty()) {
            continue;
        }
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw ParseError(where + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        auto parse_double = [&](std::size_t col) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(fields[col], &used);
            } catch (const std::exception&) {
                used = std::string::npos;
            }
            if (used != fields[col].size()) {
                throw ParseError(where + ":" + std::to_string(line_no) + ": bad number \"" +
                                 fields[col] + "\"");
            }
            return v;
        };
        HistoryRecord record;
        std::size_t used = 0;
        try {
            record.der_id = std::stoi(fields[id_col], &used);
        } catch (const std::exception&) {
            used = std::string::npos;
        }
        if (used != fields[id_col].size()) {
            throw ParseError(where + ":" + std::to_string(line_no) + ": bad der_id \"" +
                             fields[id_col] + "\"");
        }
        record.committed_kw = parse_double(committed_col);
        record.supplied_kw = parse_double(supplied_col);
        records.push_back(record);
    }
    return records;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot open \"" + tmp.string() + "\" for writing");
        }
        out << content;
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp);
            throw Error("short write to \"" + tmp.string() + "\"");
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace derres
