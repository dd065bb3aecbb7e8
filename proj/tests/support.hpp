#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "llm4vis/llm.hpp"
#include "llm4vis/tabular.hpp"

namespace testsupport {

namespace fs = std::filesystem;

inline fs::path data_path(const std::string& rel) { return fs::path(LLM4VIS_TEST_DATA) / rel; }

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const fs::path& p, const std::string& content) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "llm4vis-test-XXXXXX").string();
        if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    fs::path path_;
};

/// Provider answering from a function of the prompt text. Counts calls.
class FunctionProvider : public llm4vis::llm::Provider {
public:
    using Fn = std::function<std::string(const std::string& prompt)>;
    explicit FunctionProvider(Fn fn, std::string name = "scripted") : fn_(std::move(fn)), name_(std::move(name)) {}

    llm4vis::llm::ChatResponse complete(const llm4vis::llm::ChatRequest& req) override {
        ++calls_;
        return {fn_(req.messages.back().content), llm4vis::llm::FinishReason::Stop, ""};
    }
    std::string_view name() const override { return name_; }
    std::size_t calls() const { return calls_.load(); }

private:
    Fn fn_;
    std::string name_;
    std::atomic<std::size_t> calls_{0};
};

/// Provider that fails every call. Used to prove a run is served from cache.
class RefusingProvider : public llm4vis::llm::Provider {
public:
    llm4vis::llm::ChatResponse complete(const llm4vis::llm::ChatRequest&) override {
        ++calls_;
        throw llm4vis::llm::ProviderError("refusing provider called", false);
    }
    std::string_view name() const override { return "refusing"; }
    std::size_t calls() const { return calls_.load(); }

private:
    std::atomic<std::size_t> calls_{0};
};

inline llm4vis::tabular::Column numeric_column(const std::string& name, const std::vector<double>& values) {
    std::vector<llm4vis::tabular::Cell> cells;
    for (double v : values) cells.push_back(llm4vis::tabular::Cell::number(v));
    return llm4vis::tabular::Column(name, std::move(cells),
                                    llm4vis::tabular::ColumnKind::of(llm4vis::tabular::DataType::Decimal));
}

inline llm4vis::tabular::TabularDataset numeric_dataset(const std::string& id, const std::vector<double>& x,
                                                        const std::vector<double>& y) {
    return {id, numeric_column("x value", x), numeric_column("y value", y)};
}

/// Score-object response in the layout the recommendation template asks for.
inline std::string scored_response(const std::string& explanation, double line, double scatter, double bar,
                                   double box) {
    std::ostringstream ss;
    ss << explanation << "\n\nThe final answer in JSON format would be:\n```json\n{\n"
       << "  \"line chart\": " << line << ",\n  \"scatter plot\": " << scatter << ",\n  \"bar chart\": " << bar
       << ",\n  \"box plot\": " << box << "\n}\n```";
    return ss.str();
}

}  // namespace testsupport
