#include "mlpref/prompts/library.hpp"

#include <cstdlib>

#include "mlpref/core/error.hpp"
#include "mlpref/core/jsonl.hpp"

namespace mlpref::prompts {

Library Library::open(const std::filesystem::path& assets_dir) {
    auto dir = assets_dir / "prompts";
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("prompt asset directory not found: " + dir.string());
    Library lib;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        lib.templates_[entry.path().stem().string()] = read_file(entry.path());
    }
    if (lib.templates_.empty()) throw ConfigError("no prompt templates in " + dir.string());
    return lib;
}

Library Library::open_default() {
    if (const char* env = std::getenv("MLPREF_ASSETS")) return open(env);
    return open(MLPREF_ASSETS_DIR);
}

const std::string& Library::text(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw ConfigError("unknown prompt template: " + name);
    return it->second;
}

bool Library::has(const std::string& name) const { return templates_.count(name) > 0; }

std::string Library::render(const std::string& tmpl,
                            const std::map<std::string, std::string>& values) {
    std::string out = tmpl;
    for (const auto& [key, value] : values) {
        const std::string token = "{" + key + "}";
        std::size_t pos = 0;
        while ((pos = out.find(token, pos)) != std::string::npos) {
            out.replace(pos, token.size(), value);
            pos += value.size();
        }
    }
    return out;
}

llm::ChatRequest Library::request(const std::string& base,
                                  const std::map<std::string, std::string>& values) const {
    llm::ChatRequest req;
    req.system = render(text(base + ".system"), values);
    req.user = render(text(base + ".user"), values);
    return req;
}

}  // namespace mlpref::prompts
