public class Run20 {
    public static void main(String[] args) {
        int v = 46;
        String s = String.valueOf(v);
        String t = s + "!";
        System.out.println(t);
    }
}
