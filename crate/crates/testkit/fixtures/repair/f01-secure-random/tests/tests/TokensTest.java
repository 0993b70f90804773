package tests;

public class TokensTest {
    public static boolean rollInRange() {
        int v = app.Tokens.roll(6);
        return v >= 1 && v <= 6;
    }

    public static boolean sourceIsSecure() {
        return app.Tokens.source() instanceof java.security.SecureRandom;
    }
}
