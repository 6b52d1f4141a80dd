#include <random>
#include <set>
#include <string>

#include "doctest.h"
#include "wsnkm/crypto.hpp"

using namespace wsnkm;

namespace {

Bytes text(std::string_view s) { return Bytes(s.begin(), s.end()); }

KeyMaterial k16() {
  KeyMaterial k;
  for (std::size_t i = 0; i < 16; ++i) k.bytes[i] = static_cast<std::uint8_t>(i + 1);
  return k;
}

std::string hex(const std::array<std::uint8_t, 32>& a) { return to_hex(a); }

}  // namespace

TEST_CASE("hmac_sha256 matches RFC 4231 vectors") {
  CHECK(hex(hmac_sha256(Bytes(20, 0x0b), text("Hi There"))) ==
        "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7");
  CHECK(hex(hmac_sha256(text("Jefe"), text("what do ya want for nothing?"))) ==
        "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
  CHECK(hex(hmac_sha256(Bytes(20, 0xaa), Bytes(50, 0xdd))) ==
        "773ea91e36800e46854db8ebd09181a72959098b3ef8c122d9635514ced565fe");
  Bytes key4;
  for (int i = 1; i <= 25; ++i) key4.push_back(static_cast<std::uint8_t>(i));
  CHECK(hex(hmac_sha256(key4, Bytes(50, 0xcd))) == "82558a389a443c0ea4cc819899f2083a85f0faa3e578f8077a2e3ff46729665b");
  CHECK(hex(hmac_sha256(Bytes(131, 0xaa), text("Test Using Larger Than Block-Size Key - Hash Key First"))) ==
        "60e431591ee0b67f0d8a26aacbf5b77f8e0bc6213728c5140546040f0ee37f54");
  CHECK(hex(hmac_sha256(Bytes(131, 0xaa),
                        text("This is a test using a larger than block-size key and a larger than block-size data. "
                             "The key needs to be hashed before being used by the HMAC algorithm."))) ==
        "9b09ffa71b942fcb27635fbcd5b0e944bfdc63644f0713938a7f51535c3a35e2");
}

// Golden values computed with an independent HMAC implementation.
TEST_CASE("derivations match reference values") {
  const KeyMaterial k = k16();
  CHECK(to_hex(master_key(k, NodeId{7}).view()) == "be1b569498facdaa86060bfa39550a79");
  CHECK(to_hex(individual_key(k, NodeId{300}).view()) == "e2b8930b7adf8df8471db7297e719bac");
  CHECK(to_hex(pairwise_key(master_key(k, NodeId{9}), NodeId{4}).view()) == "03deae30e3a88624b9372a2cfe231af2");
  CHECK(to_hex(mac(k, text("hello")).view()) == "47b202eab6f8a8eb");

  Bytes pt;
  for (int i = 0; i < 20; ++i) pt.push_back(static_cast<std::uint8_t>(i));
  CHECK(to_hex(encrypt(k, pt, make_nonce(0x0001000000000005ULL))) == "fbaa3a317f661def45486bc98f06f94c85c4a94c");

  auto chain = KeyChain::generate(k, 3);
  REQUIRE(chain.length() == 3);
  CHECK(to_hex(chain.links()[0].view()) == "c569ba2bb624410c378d7de0aed77a5c");
  CHECK(to_hex(chain.links()[1].view()) == "0bc03dffa2cb217c34b1afed359748bb");
  CHECK(to_hex(chain.links()[2].view()) == "504b8fe1342d38eb394453eb2b208a55");
}

TEST_CASE("prf is deterministic") {
  const KeyMaterial k = k16();
  const Bytes in{1, 2, 3};
  CHECK(prf(k, in) == prf(k, in));
  CHECK(derive(Domain::Master, k, NodeId{5}) == derive(Domain::Master, k, NodeId{5}));
}

TEST_CASE("prf separates every id pair in 0..255") {
  std::mt19937_64 rng(11);
  const KeyMaterial k = KeyMaterial::random(rng);
  std::set<KeyMaterial> outputs;
  for (unsigned u = 0; u < 256; ++u) outputs.insert(master_key(k, NodeId{static_cast<std::uint16_t>(u)}));
  CHECK(outputs.size() == 256);
}

TEST_CASE("prf separates 1000 random key pairs") {
  std::mt19937_64 rng(12);
  const Bytes x{0x02, 0x00, 0x01};
  int collisions = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto k1 = KeyMaterial::random(rng);
    const auto k2 = KeyMaterial::random(rng);
    REQUIRE(k1 != k2);
    if (prf(k1, x) == prf(k2, x)) ++collisions;
  }
  CHECK(collisions == 0);
}

TEST_CASE("domains never cross") {
  const KeyMaterial k = k16();
  std::set<KeyMaterial> outs;
  for (auto d : {Domain::Individual, Domain::Master, Domain::Pairwise, Domain::ClusterWrap})
    outs.insert(derive(d, k, NodeId{42}));
  CHECK(outs.size() == 4);
}

TEST_CASE("derived keys are never all-zero") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto k = KeyMaterial::random(rng);
    CHECK_FALSE(k.is_zero());
    CHECK_FALSE(master_key(k, NodeId{static_cast<std::uint16_t>(i)}).is_zero());
  }
}

TEST_CASE("mac round trip and tamper detection") {
  const KeyMaterial k = k16();
  const Bytes m = text("cluster key for 12");
  const MacTag tag = mac(k, m);
  CHECK(verify(k, m, tag));

  for (std::size_t bit = 0; bit < m.size() * 8; ++bit) {
    Bytes t = m;
    t[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    CHECK_FALSE(verify(k, t, tag));
  }
  for (std::size_t bit = 0; bit < kMacSize * 8; ++bit) {
    MacTag t = tag;
    t.bytes[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    CHECK_FALSE(verify(k, m, t));
  }
}

TEST_CASE("mac rejects 1000 random wrong keys") {
  std::mt19937_64 rng(21);
  const KeyMaterial k = KeyMaterial::random(rng);
  const Bytes m = text("ack");
  const MacTag tag = mac(k, m);
  int accepted = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto wrong = KeyMaterial::random(rng);
    if (wrong != k && verify(wrong, m, tag)) ++accepted;
  }
  CHECK(accepted == 0);
}

TEST_CASE("encryption round trip, length and nonce separation") {
  const KeyMaterial k = k16();
  for (std::size_t len : {0u, 1u, 15u, 16u, 17u, 40u}) {
    Bytes pt(len);
    for (std::size_t i = 0; i < len; ++i) pt[i] = static_cast<std::uint8_t>(i * 7);
    const auto ct = encrypt(k, pt, make_nonce(9));
    CHECK(ct.size() == pt.size());
    CHECK(decrypt(k, ct, make_nonce(9)) == pt);
  }
  const Bytes pt(16, 0x55);
  CHECK(encrypt(k, pt, make_nonce(1)) != encrypt(k, pt, make_nonce(2)));
}

TEST_CASE("decrypt with 1000 random wrong keys never yields the plaintext") {
  std::mt19937_64 rng(22);
  const KeyMaterial k = KeyMaterial::random(rng);
  const Bytes pt(16, 0x42);
  const auto ct = encrypt(k, pt, make_nonce(77));
  int recovered = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto wrong = KeyMaterial::random(rng);
    if (wrong != k && decrypt(wrong, ct, make_nonce(77)) == pt) ++recovered;
  }
  CHECK(recovered == 0);
}

TEST_CASE("key chain") {
  const KeyMaterial seed = k16();
  SUBCASE("L = 0 is rejected") { CHECK_THROWS_AS(KeyChain::generate(seed, 0), std::invalid_argument); }
  SUBCASE("L = 1 is the seed's one-way image") {
    auto c = KeyChain::generate(seed, 1);
    REQUIRE(c.length() == 1);
    CHECK(c.links()[0] == one_way(seed));
    CHECK(c.verify());
  }
  SUBCASE("L = 20 verifies link by link") {
    auto c = KeyChain::generate(seed, 20);
    REQUIRE(c.length() == 20);
    for (std::size_t i = 1; i < 20; ++i) CHECK(one_way(c.links()[i]) == c.links()[i - 1]);
    CHECK(c.verify());
    CHECK(KeyChain::generate(seed, 20).links() == c.links());
  }
  SUBCASE("anchor does not reveal the next link by brute force") {
    auto c = KeyChain::generate(seed, 2);
    KeyMaterial guess;
    bool found = false;
    for (std::uint32_t i = 0; i < (1u << 16); ++i) {
      guess.bytes[0] = static_cast<std::uint8_t>(i >> 8);
      guess.bytes[1] = static_cast<std::uint8_t>(i);
      if (one_way(guess) == c.links()[0]) found = true;
    }
    CHECK_FALSE(found);
  }
}

TEST_CASE("hex and integer helpers") {
  CHECK(to_hex(from_hex("00ff10Ab")) == "00ff10ab");
  CHECK_THROWS(from_hex("abc"));
  CHECK_THROWS(from_hex("zz"));
  Bytes b;
  put_u16(b, 0x1234);
  put_u32(b, 0xdeadbeef);
  CHECK(get_u16(b, 0) == 0x1234);
  CHECK(get_u32(b, 2) == 0xdeadbeef);
  CHECK(to_hex(make_nonce(0x0102030405060708ULL)) == "0102030405060708");
}
