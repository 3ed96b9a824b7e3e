#pragma once

#include <map>
#include <memory>
#include <mutex>

namespace hoam::detail {

// Process-wide memo table for immutable per-grid lookup tables. Values are
// built outside the lock; if two threads race, the first insert wins and both
// observe the same object afterwards.
template <typename Key, typename Value, typename Factory>
std::shared_ptr<const Value> memoize(const Key& key, Factory&& make) {
    static std::mutex mutex;
    static std::map<Key, std::shared_ptr<const Value>> table;
    {
        std::lock_guard lock(mutex);
        if (auto it = table.find(key); it != table.end()) {
            return it->second;
        }
    }
    auto built = std::make_shared<const Value>(make());
    std::lock_guard lock(mutex);
    auto [it, inserted] = table.emplace(key, std::move(built));
    return it->second;
}

}  // namespace hoam::detail
