#include <doctest.h>

#include <string>

#include "landmatch/error.hpp"
#include "landmatch/md5.hpp"
#include "landmatch/xml.hpp"
#include "landmatch/zip.hpp"

namespace lm = landmatch;

TEST_CASE("md5 matches the reference vectors") {
    CHECK(lm::md5_hex("") == "d41d8cd98f00b204e9800998ecf8427e");
    CHECK(lm::md5_hex("a") == "0cc175b9c0f1b6a831c399e269772661");
    CHECK(lm::md5_hex("abc") == "900150983cd24fb0d6963f7d28e17f72");
    CHECK(lm::md5_hex("message digest") == "f96b697d7cb7938d525a2f31aaf161d0");
    CHECK(lm::md5_hex("abcdefghijklmnopqrstuvwxyz") == "c3fcd3d76192e4007dfb496cca67e13b");
    CHECK(lm::md5_hex("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789") ==
          "d174ab98d277d9f5a5611c2c9f419d9f");
    CHECK(lm::md5_hex("1234567890123456789012345678901234567890123456789012345678901234567890"
                      "1234567890") == "57edf4a22be3c955ac49da2e2107b67a");
}

TEST_CASE("md5 handles block boundaries") {
    for (const std::size_t len : {55, 56, 63, 64, 65, 119, 120, 128, 1000}) {
        const std::string digest = lm::md5_hex(std::string(len, 'x'));
        CHECK(digest.size() == 32);
        CHECK(digest == lm::md5_hex(std::string(len, 'x')));
    }
    CHECK(lm::md5_hex(std::string(64, 'x')) != lm::md5_hex(std::string(65, 'x')));
}

TEST_CASE("zip archives round-trip in memory") {
    std::vector<lm::zip::Entry> entries = {{"main.xml", "<root/>"},
                                           {"bindata/data.bin", std::string("\x00\x01\x02\xff", 4)}};
    const std::string bytes = lm::zip::build_archive(entries);
    const lm::zip::Archive archive = lm::zip::parse_archive(bytes);

    REQUIRE(archive.entries.size() == 2);
    CHECK(archive.entries[0].name == "main.xml");
    CHECK(archive.entries[1].name == "bindata/data.bin");
    REQUIRE(archive.find("main.xml") != nullptr);
    CHECK(*archive.find("main.xml") == "<root/>");
    CHECK(*archive.find("bindata/data.bin") == std::string("\x00\x01\x02\xff", 4));
    CHECK(archive.find("missing") == nullptr);
}

TEST_CASE("zip output is byte-stable") {
    auto build = [] {
        return lm::zip::build_archive({{"a.txt", "same"}, {"b.txt", std::string(3000, 'b')}});
    };
    CHECK(build() == build());
}

TEST_CASE("zip compresses repetitive payloads") {
    const std::string bytes = lm::zip::build_archive({{"big", std::string(100000, 'z')}});
    CHECK(bytes.size() < 10000);
    CHECK(*lm::zip::parse_archive(bytes).find("big") == std::string(100000, 'z'));
}

TEST_CASE("zip rejects corrupt archives") {
    CHECK_THROWS_AS(lm::zip::parse_archive("not a zip"), lm::Error);
    std::string bytes = lm::zip::build_archive({{"a", "payload payload payload"}});
    bool threw = false;
    for (std::size_t i = 0; i < bytes.size() && !threw; ++i) {
        std::string bad = bytes;
        bad[i] ^= 0x5a;
        try {
            const lm::zip::Archive archive = lm::zip::parse_archive(bad);
            (void)archive;
        } catch (const lm::Error&) {
            threw = true;
        }
    }
    CHECK(threw);
}

TEST_CASE("xml parses nested elements, attributes and namespaces") {
    const lm::xml::Node root = lm::xml::parse(
        "<p:ISO5436_2 xmlns:p=\"x\"><Record1><Revision>ISO5436 - 2000</Revision></Record1>"
        "<Record3><MatrixDimension><SizeX>2</SizeX></MatrixDimension>"
        "<DataLink><PointDataLink href=\"bin\"/></DataLink></Record3></p:ISO5436_2>");
    CHECK(root.name == "ISO5436_2");
    const lm::xml::Node* revision = root.find("Record1/Revision");
    REQUIRE(revision != nullptr);
    CHECK(revision->text == "ISO5436 - 2000");
    const lm::xml::Node* link = root.find("Record3/DataLink/PointDataLink");
    REQUIRE(link != nullptr);
    REQUIRE(link->attr("href") != nullptr);
    CHECK(*link->attr("href") == "bin");
    CHECK(root.find("Record3/Missing") == nullptr);
}

TEST_CASE("xml entities unescape in text") {
    const lm::xml::Node root = lm::xml::parse("<a>&lt;x&gt; &amp; &quot;y&quot;</a>");
    CHECK(root.text == "<x> & \"y\"");
}

TEST_CASE("xml rejects malformed documents") {
    CHECK_THROWS_AS(lm::xml::parse("<open>"), lm::Error);
    CHECK_THROWS_AS(lm::xml::parse("plain text"), lm::Error);
}

TEST_CASE("xml escape covers the metacharacters") {
    CHECK(lm::xml::escape("a<b&c>\"d\"") == "a&lt;b&amp;c&gt;&quot;d&quot;");
    CHECK(lm::xml::escape("plain") == "plain");
    const lm::xml::Node node = lm::xml::parse("<a x=\"" + lm::xml::escape("<&>\"") + "\"/>");
    REQUIRE(node.attr("x") != nullptr);
    CHECK(*node.attr("x") == "<&>\"");
}
