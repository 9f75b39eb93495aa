#include "vega/decode/session.hpp"

#include "vega/model/incremental.hpp"

namespace vega::decode {

namespace {

class ModelSession final : public DecodeSession {
 public:
  ModelSession(const model::Transformer<float>& m, const std::vector<TokenId>& src) : dec_(m, src) {}
  int vocab_size() const override { return dec_.vocab_size(); }
  Tensor<float> step(const std::vector<std::size_t>& parents,
                     const std::vector<TokenId>& tokens) override {
    return dec_.step(parents, tokens);
  }

 private:
  model::IncrementalDecoder<float> dec_;
};

}  // namespace

std::unique_ptr<DecodeSession> start_session(const model::Transformer<float>& model,
                                             const std::vector<TokenId>& src) {
  return std::make_unique<ModelSession>(model, src);
}

}  // namespace vega::decode
