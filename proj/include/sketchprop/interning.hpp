#pragma once

// Maps external string names (node names, label names) to dense u32 ids in
// first-seen order, with reverse lookup. Dense ids are what the graph, the
// label stores, and the sketch hashes all key on.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sketchprop {

class Interner {
public:
    // Returns the existing id or assigns the next one.
    std::uint32_t intern(std::string_view name) {
        auto it = ids_.find(std::string(name));
        if (it != ids_.end()) return it->second;
        std::uint32_t id = static_cast<std::uint32_t>(names_.size());
        names_.emplace_back(name);
        ids_.emplace(names_.back(), id);
        return id;
    }

    std::optional<std::uint32_t> find(std::string_view name) const {
        auto it = ids_.find(std::string(name));
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& name(std::uint32_t id) const {
        if (id >= names_.size()) throw std::out_of_range("interner id out of range");
        return names_[id];
    }

    std::size_t size() const noexcept { return names_.size(); }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::uint32_t> ids_;
};

} // namespace sketchprop
