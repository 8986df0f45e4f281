#pragma once
#include <filesystem>
#include <map>
#include <string>

#include "mlpref/llm/gateway.hpp"

namespace mlpref::prompts {

// Prompt templates are external text assets with {name} placeholders.
// Each template pair lives at <assets>/prompts/<base>.{system,user}.txt.
class Library {
  public:
    static Library open(const std::filesystem::path& assets_dir);
    // MLPREF_ASSETS env var, falling back to the build-time assets path.
    static Library open_default();

    const std::string& text(const std::string& name) const;  // e.g. "result_prediction.user"
    bool has(const std::string& name) const;

    // Replaces every occurrence of "{key}" for the provided keys only;
    // brace text that is not a provided key is left untouched.
    static std::string render(const std::string& tmpl,
                              const std::map<std::string, std::string>& values);

    llm::ChatRequest request(const std::string& base,
                             const std::map<std::string, std::string>& values) const;

  private:
    std::map<std::string, std::string> templates_;
};

}  // namespace mlpref::prompts
